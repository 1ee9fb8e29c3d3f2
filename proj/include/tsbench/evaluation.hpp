#pragma once

#include "tsbench/dgp.hpp"
#include "tsbench/ml.hpp"
#include "tsbench/queue.hpp"
#include "tsbench/series.hpp"
#include "tsbench/tbats.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tsbench::eval {

enum class Method { RandomForest, RandomForestDiff, XGBoost, XGBoostDiff, Arima, Sarima, Tbats, Naive };

inline constexpr std::array<Method, 8> kAllMethods = {
    Method::RandomForest, Method::RandomForestDiff, Method::XGBoost, Method::XGBoostDiff,
    Method::Arima,        Method::Sarima,           Method::Tbats,   Method::Naive,
};

std::string_view to_string(Method m) noexcept;
/// Human-readable label as used in result tables ("Random Forest Diff").
std::string_view display_name(Method m) noexcept;
std::optional<Method> parse_method(std::string_view name) noexcept;
bool is_ml(Method m) noexcept;
bool is_differenced(Method m) noexcept;

/// Tunables shared by every method; defaults follow the benchmark configuration.
struct MethodConfig {
    int window = 8;
    int sarima_period = 1;
    ml::ForestOptions forest{};
    ml::BoostOptions boost{};
    models::TbatsOptions tbats{};
};

struct Forecast {
    double value = 0.0;
    bool fallback = false;  ///< the method failed and the naive fallback produced the value
};

/// Fits `method` on `train` and returns its one-step forecast. Exceptions propagate.
double forecast_next(Method method, const TimeSeries& train, const MethodConfig& cfg, std::uint64_t seed);

/// As forecast_next, but fit failures fall back to the last observation and are flagged.
Forecast forecast_next_or_fallback(Method method, const TimeSeries& train, const MethodConfig& cfg,
                                   std::uint64_t seed);

// ---------------------------------------------------------------------------
// Settings
// ---------------------------------------------------------------------------

using Source = std::variant<dgp::DgpKind, queue::QueueSpec>;

std::string source_name(const Source& s);
std::optional<Source> parse_source(std::string_view name);
bool is_queue(const Source& s) noexcept;

/// One data-generating configuration: source, overlay, length. Queues carry no overlay.
struct DataSetting {
    Source source = dgp::DgpKind::AR;
    dgp::OverlayKind overlay = dgp::OverlayKind::None;
    Eigen::Index n = 100;
    dgp::JumpSpec jump{};
    dgp::RandomWalkSpec walk{};

    std::string fingerprint() const;
};

struct Setting {
    DataSetting data;
    Method method = Method::Naive;
    int window = 8;  ///< used only by ML methods

    std::string fingerprint() const;
};

/// The 150 source x overlay x length combinations (12 x 4 + 2 queues, times 3 lengths).
std::vector<DataSetting> full_grid(const std::vector<Eigen::Index>& lengths = {100, 500, 1000});

/// Replicate r of a data setting, of length `len`. Identical across methods.
TimeSeries simulate(const DataSetting& data, Eigen::Index len, std::uint64_t seed);

/// Seed of replication r: a stable hash of (seed_base, data fingerprint, r).
std::uint64_t replication_seed(std::uint64_t seed_base, const DataSetting& data, std::uint64_t r);

enum class EvalMode {
    Replications,  ///< fresh series per replication, train on n, score point n+1
    Rolling,       ///< one path of length n+R, window of n rolled forward R times
};

struct ReplicationRecord {
    double actual = 0.0;
    double predicted = 0.0;
    bool fallback = false;
};

struct MetricsRow {
    Setting setting;
    MetricPair metrics;
    int replications = 0;
    std::uint64_t seed_base = 0;
    int fit_failures = 0;
    std::vector<ReplicationRecord> log;
};

MetricsRow run_setting(const Setting& setting, int replications, std::uint64_t seed_base,
                       const MethodConfig& cfg = {}, EvalMode mode = EvalMode::Replications);

/// Replication r of run_setting on its own; any order of calls gives the same records.
ReplicationRecord run_replication(const Setting& setting, int r, std::uint64_t seed_base, const MethodConfig& cfg = {},
                                  EvalMode mode = EvalMode::Replications, int replications = 1);

/// Builds the row run_setting would return from records in replication order.
MetricsRow assemble_row(const Setting& setting, std::uint64_t seed_base, std::vector<ReplicationRecord> log);

/// Aggregates a replication log exactly as run_setting does.
MetricPair aggregate(const std::vector<ReplicationRecord>& log);

// ---------------------------------------------------------------------------
// Ranking
// ---------------------------------------------------------------------------

/// Ascending-MSE ranks with averaged ties. Throws if rows belong to different data settings.
std::vector<double> rank_methods(const std::vector<MetricsRow>& rows);

/// Ranks for plain MSE values.
std::vector<double> rank_values(const std::vector<double>& mse);

enum class SettingGroup { Queueing, NoComplexity, Jump, RandomWalk, Both };

inline constexpr std::array<SettingGroup, 5> kAllGroups = {SettingGroup::Queueing, SettingGroup::NoComplexity,
                                                           SettingGroup::Jump, SettingGroup::RandomWalk,
                                                           SettingGroup::Both};

std::string_view to_string(SettingGroup g) noexcept;
SettingGroup group_of(const DataSetting& d) noexcept;

struct RankTable {
    std::vector<Method> methods;
    std::vector<SettingGroup> groups;
    /// median_rank[method index][group index]; NaN where the group has no settings.
    std::vector<std::vector<double>> median_rank;
    std::map<SettingGroup, int> settings_per_group;

    double at(Method m, SettingGroup g) const;
};

/// Thrown when a data setting lacks rows for some method.
class IncompleteGridError : public std::runtime_error {
public:
    explicit IncompleteGridError(std::vector<std::string> missing);
    const std::vector<std::string>& missing() const noexcept { return missing_; }

private:
    std::vector<std::string> missing_;
};

/**
 * Median over each group's data settings of the per-setting MSE ranks. ML
 * methods enter with rows at `window`; rows at other windows are ignored.
 */
RankTable median_rank_table(const std::vector<MetricsRow>& rows, const std::vector<Method>& methods,
                            int window = 8);

// ---------------------------------------------------------------------------
// Real-data protocol
// ---------------------------------------------------------------------------

struct RollingResult {
    MetricPair metrics;
    std::vector<ReplicationRecord> log;
    int fit_failures = 0;
};

/// Expanding-window refit: fit on the first train_len + k points, score point train_len + k + 1.
RollingResult rolling_cv(const TimeSeries& series, Method method, int train_len = 50, int horizon = 10,
                         const MethodConfig& cfg = {}, std::uint64_t seed = 0);

}  // namespace tsbench::eval
