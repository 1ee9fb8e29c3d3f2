#pragma once

#include "tsbench/evaluation.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsbench::harness {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr std::uint64_t kDefaultSeedBase = 2024;
inline constexpr const char* kOutputRootEnv = "TSBENCH_OUT";

enum class Mode { Simulate, Evaluate, Rank, RealData, Plot };

std::string_view to_string(Mode m) noexcept;

/// Raised for schema violations; the message starts with the offending field path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

struct RealDataConfig {
    std::string path = "data/Daily_Demand_Forecasting_Orders.csv";
    char delimiter = ';';
    std::map<std::string, std::string> columns = {
        {"A", "Order type A"}, {"B", "Order type B"}, {"C", "Order type C"}};
    int train_len = 50;
    int horizon = 10;

    bool operator==(const RealDataConfig&) const = default;
};

struct RunConfig {
    Mode mode = Mode::Evaluate;
    std::vector<std::string> sources;  ///< canonical names; all 12 DGPs and both queues by default
    std::vector<dgp::OverlayKind> overlays{dgp::kAllOverlays.begin(), dgp::kAllOverlays.end()};
    std::vector<Eigen::Index> lengths{100, 500, 1000};
    std::vector<eval::Method> methods{eval::kAllMethods.begin(), eval::kAllMethods.end()};
    std::vector<int> windows{8};
    int replications = 1000;
    std::uint64_t seed_base = kDefaultSeedBase;
    int threads = 1;  ///< 0 means one per hardware thread
    std::string output_dir = "results";
    eval::EvalMode eval_mode = eval::EvalMode::Replications;
    dgp::JumpRule jump_rule = dgp::JumpRule::ExpectedTenJumps;
    double jump_sigma_p_sq = 1.0;
    double snr = 4.0;
    int sarima_period = 1;
    int forest_trees = 500;
    int forest_min_node_size = 5;
    int boost_rounds = 100;
    double boost_learning_rate = 0.3;
    int boost_max_depth = 6;
    double boost_lambda = 1.0;
    double boost_min_child_weight = 1.0;
    RealDataConfig realdata{};

    RunConfig();
    bool operator==(const RunConfig&) const = default;

    eval::MethodConfig method_config() const;
};

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& c);
RunConfig load_config(const std::filesystem::path& path);

/// Data settings selected by the config, in enumeration order (length, source, overlay).
std::vector<eval::DataSetting> enumerate_data(const RunConfig& c);
/// enumerate_data crossed with methods; ML methods additionally crossed with windows.
std::vector<eval::Setting> enumerate_settings(const RunConfig& c);

/// output_dir, placed under $TSBENCH_OUT when that is set and output_dir is relative.
std::filesystem::path resolve_output_dir(const RunConfig& c);

using Progress = std::function<void(std::size_t done, std::size_t total)>;

/// Runs every (setting, replication) task on `threads` workers. Output order and values do not depend on threads.
std::vector<eval::MetricsRow> run_grid(const std::vector<eval::Setting>& settings, int replications,
                                       std::uint64_t seed_base, const eval::MethodConfig& cfg, eval::EvalMode mode,
                                       int threads, const Progress& progress = {});

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

std::string format_double(double v);

void write_metrics_csv(const std::vector<eval::MetricsRow>& rows, const std::filesystem::path& path);
/// Rows without replication logs.
std::vector<eval::MetricsRow> read_metrics_csv(const std::filesystem::path& path);
void write_rank_csv(const eval::RankTable& table, const std::filesystem::path& path);
/// Per-replication errors, one line per record, for brute-force recomputation.
void write_log_csv(const std::vector<eval::MetricsRow>& rows, const std::filesystem::path& path);

nlohmann::json make_manifest(const RunConfig& c, const std::map<std::string, std::string>& outputs);
/// FNV-1a of a file's bytes as 16 hex digits.
std::string file_checksum(const std::filesystem::path& path);

struct RunSummary {
    std::filesystem::path output_dir;
    std::vector<std::filesystem::path> files;
    std::size_t settings = 0;
    int fit_failures = 0;
};

/// Executes config.mode end to end and writes its artifacts.
RunSummary run(const RunConfig& c, const Progress& progress = {});

}  // namespace tsbench::harness
