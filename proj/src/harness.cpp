#include "tsbench/harness.hpp"

#include "tsbench/demand.hpp"
#include "tsbench/plot.hpp"

#include <atomic>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace tsbench::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 5> kModeNames = {"simulate", "evaluate", "rank", "realdata", "plot"};

std::string_view jump_rule_name(dgp::JumpRule r) {
    return r == dgp::JumpRule::ExpectedTenJumps ? "expected_ten" : "per_step";
}

std::string_view eval_mode_name(eval::EvalMode m) {
    return m == eval::EvalMode::Replications ? "replications" : "rolling";
}

std::string idx_path(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    if (!j.is_object()) {
        throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
    }
    for (const auto& [key, _] : j.items()) {
        if (!allowed.count(key)) {
            throw ConfigError(path.empty() ? key : path + "." + key, "unknown field");
        }
    }
}

long long get_int(const json& j, const std::string& path, long long lo, long long hi) {
    if (!j.is_number_integer()) {
        throw ConfigError(path, "expected an integer");
    }
    const long long v = j.get<long long>();
    if (v < lo || v > hi) {
        throw ConfigError(path, "value " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
                                    std::to_string(hi) + "]");
    }
    return v;
}

double get_positive(const json& j, const std::string& path, bool allow_zero = false) {
    if (!j.is_number()) {
        throw ConfigError(path, "expected a number");
    }
    const double v = j.get<double>();
    if (!std::isfinite(v) || v < 0.0 || (!allow_zero && v == 0.0)) {
        throw ConfigError(path, allow_zero ? "expected a finite non-negative number" : "expected a positive number");
    }
    return v;
}

std::string get_string(const json& j, const std::string& path) {
    if (!j.is_string()) {
        throw ConfigError(path, "expected a string");
    }
    return j.get<std::string>();
}

template <typename T, typename Parse>
std::vector<T> get_list(const json& j, const std::string& path, Parse parse) {
    if (!j.is_array()) {
        throw ConfigError(path, "expected an array");
    }
    if (j.empty()) {
        throw ConfigError(path, "must not be empty");
    }
    std::vector<T> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(parse(j[i], idx_path(path, i)));
    }
    return out;
}

}  // namespace

std::string_view to_string(Mode m) noexcept { return kModeNames[static_cast<std::size_t>(m)]; }

RunConfig::RunConfig() {
    for (const auto k : dgp::kAllDgps) {
        sources.emplace_back(dgp::to_string(k));
    }
    sources.emplace_back("MM1");
    sources.emplace_back("MM2");
}

eval::MethodConfig RunConfig::method_config() const {
    eval::MethodConfig cfg;
    cfg.window = windows.front();
    cfg.sarima_period = sarima_period;
    cfg.forest.trees = forest_trees;
    cfg.forest.min_node_size = forest_min_node_size;
    cfg.boost.rounds = boost_rounds;
    cfg.boost.learning_rate = boost_learning_rate;
    cfg.boost.max_depth = boost_max_depth;
    cfg.boost.lambda_reg = boost_lambda;
    cfg.boost.min_child_weight = boost_min_child_weight;
    return cfg;
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    check_keys(j, "", {"mode", "sources", "overlays", "lengths", "methods", "windows", "replications", "seed_base",
                       "threads", "output_dir", "eval_mode", "jump", "random_walk", "sarima_period", "forest", "boost",
                       "realdata"});
    if (j.contains("mode")) {
        const std::string m = get_string(j["mode"], "mode");
        const auto it = std::find(kModeNames.begin(), kModeNames.end(), m);
        if (it == kModeNames.end()) {
            throw ConfigError("mode", "unknown mode '" + m + "'");
        }
        c.mode = static_cast<Mode>(it - kModeNames.begin());
    }
    if (j.contains("sources")) {
        c.sources = get_list<std::string>(j["sources"], "sources", [](const json& v, const std::string& p) {
            const std::string name = get_string(v, p);
            const auto src = eval::parse_source(name);
            if (!src) {
                throw ConfigError(p, "unknown source '" + name + "'");
            }
            return eval::source_name(*src);
        });
    }
    if (j.contains("overlays")) {
        c.overlays = get_list<dgp::OverlayKind>(j["overlays"], "overlays", [](const json& v, const std::string& p) {
            const std::string name = get_string(v, p);
            const auto o = dgp::parse_overlay(name);
            if (!o) {
                throw ConfigError(p, "unknown overlay '" + name + "'");
            }
            return *o;
        });
    }
    if (j.contains("lengths")) {
        c.lengths = get_list<Eigen::Index>(j["lengths"], "lengths", [](const json& v, const std::string& p) {
            return static_cast<Eigen::Index>(get_int(v, p, 20, 1'000'000));
        });
    }
    if (j.contains("methods")) {
        c.methods = get_list<eval::Method>(j["methods"], "methods", [](const json& v, const std::string& p) {
            const std::string name = get_string(v, p);
            const auto m = eval::parse_method(name);
            if (!m) {
                throw ConfigError(p, "unknown method '" + name + "'");
            }
            return *m;
        });
    }
    if (j.contains("windows")) {
        c.windows = get_list<int>(j["windows"], "windows", [](const json& v, const std::string& p) {
            return static_cast<int>(get_int(v, p, 1, 1000));
        });
    }
    if (j.contains("replications")) {
        c.replications = static_cast<int>(get_int(j["replications"], "replications", 1, 100'000'000));
    }
    if (j.contains("seed_base")) {
        if (!j["seed_base"].is_number_unsigned() && !(j["seed_base"].is_number_integer() &&
                                                     j["seed_base"].get<long long>() >= 0)) {
            throw ConfigError("seed_base", "expected a non-negative integer");
        }
        c.seed_base = j["seed_base"].get<std::uint64_t>();
    }
    if (j.contains("threads")) {
        c.threads = static_cast<int>(get_int(j["threads"], "threads", 0, 4096));
    }
    if (j.contains("output_dir")) {
        c.output_dir = get_string(j["output_dir"], "output_dir");
        if (c.output_dir.empty()) {
            throw ConfigError("output_dir", "must not be empty");
        }
    }
    if (j.contains("eval_mode")) {
        const std::string m = get_string(j["eval_mode"], "eval_mode");
        if (m == "replications") {
            c.eval_mode = eval::EvalMode::Replications;
        } else if (m == "rolling") {
            c.eval_mode = eval::EvalMode::Rolling;
        } else {
            throw ConfigError("eval_mode", "expected 'replications' or 'rolling', got '" + m + "'");
        }
    }
    if (j.contains("jump")) {
        const json& jj = j["jump"];
        check_keys(jj, "jump", {"rule", "sigma_p_sq"});
        if (jj.contains("rule")) {
            const std::string r = get_string(jj["rule"], "jump.rule");
            if (r == "expected_ten") {
                c.jump_rule = dgp::JumpRule::ExpectedTenJumps;
            } else if (r == "per_step") {
                c.jump_rule = dgp::JumpRule::RatePerStep;
            } else {
                throw ConfigError("jump.rule", "expected 'expected_ten' or 'per_step', got '" + r + "'");
            }
        }
        if (jj.contains("sigma_p_sq")) c.jump_sigma_p_sq = get_positive(jj["sigma_p_sq"], "jump.sigma_p_sq");
    }
    if (j.contains("random_walk")) {
        const json& jr = j["random_walk"];
        check_keys(jr, "random_walk", {"snr"});
        if (jr.contains("snr")) c.snr = get_positive(jr["snr"], "random_walk.snr");
    }
    if (j.contains("sarima_period")) {
        c.sarima_period = static_cast<int>(get_int(j["sarima_period"], "sarima_period", 1, 366));
    }
    if (j.contains("forest")) {
        const json& jf = j["forest"];
        check_keys(jf, "forest", {"trees", "min_node_size"});
        if (jf.contains("trees")) c.forest_trees = static_cast<int>(get_int(jf["trees"], "forest.trees", 1, 100000));
        if (jf.contains("min_node_size")) {
            c.forest_min_node_size = static_cast<int>(get_int(jf["min_node_size"], "forest.min_node_size", 1, 100000));
        }
    }
    if (j.contains("boost")) {
        const json& jb = j["boost"];
        check_keys(jb, "boost", {"rounds", "learning_rate", "max_depth", "lambda", "min_child_weight"});
        if (jb.contains("rounds")) c.boost_rounds = static_cast<int>(get_int(jb["rounds"], "boost.rounds", 1, 100000));
        if (jb.contains("learning_rate")) {
            c.boost_learning_rate = get_positive(jb["learning_rate"], "boost.learning_rate");
        }
        if (jb.contains("max_depth")) {
            c.boost_max_depth = static_cast<int>(get_int(jb["max_depth"], "boost.max_depth", 1, 64));
        }
        if (jb.contains("lambda")) c.boost_lambda = get_positive(jb["lambda"], "boost.lambda", true);
        if (jb.contains("min_child_weight")) {
            c.boost_min_child_weight = get_positive(jb["min_child_weight"], "boost.min_child_weight", true);
        }
    }
    if (j.contains("realdata")) {
        const json& jd = j["realdata"];
        check_keys(jd, "realdata", {"path", "delimiter", "columns", "train_len", "horizon"});
        if (jd.contains("path")) c.realdata.path = get_string(jd["path"], "realdata.path");
        if (jd.contains("delimiter")) {
            const std::string d = get_string(jd["delimiter"], "realdata.delimiter");
            if (d.size() != 1) {
                throw ConfigError("realdata.delimiter", "expected a single character");
            }
            c.realdata.delimiter = d[0];
        }
        if (jd.contains("columns")) {
            const json& jc = jd["columns"];
            if (!jc.is_object() || jc.empty()) {
                throw ConfigError("realdata.columns", "expected a non-empty object of product -> column name");
            }
            c.realdata.columns.clear();
            for (const auto& [k, v] : jc.items()) {
                c.realdata.columns[k] = get_string(v, "realdata.columns." + k);
            }
        }
        if (jd.contains("train_len")) {
            c.realdata.train_len = static_cast<int>(get_int(jd["train_len"], "realdata.train_len", 2, 100000));
        }
        if (jd.contains("horizon")) {
            c.realdata.horizon = static_cast<int>(get_int(jd["horizon"], "realdata.horizon", 1, 100000));
        }
    }
    return c;
}

json config_to_json(const RunConfig& c) {
    json j;
    j["mode"] = std::string(to_string(c.mode));
    j["sources"] = c.sources;
    j["overlays"] = json::array();
    for (const auto o : c.overlays) j["overlays"].push_back(std::string(dgp::to_string(o)));
    j["lengths"] = json::array();
    for (const auto n : c.lengths) j["lengths"].push_back(static_cast<long long>(n));
    j["methods"] = json::array();
    for (const auto m : c.methods) j["methods"].push_back(std::string(eval::to_string(m)));
    j["windows"] = c.windows;
    j["replications"] = c.replications;
    j["seed_base"] = c.seed_base;
    j["threads"] = c.threads;
    j["output_dir"] = c.output_dir;
    j["eval_mode"] = std::string(eval_mode_name(c.eval_mode));
    j["jump"] = {{"rule", std::string(jump_rule_name(c.jump_rule))}, {"sigma_p_sq", c.jump_sigma_p_sq}};
    j["random_walk"] = {{"snr", c.snr}};
    j["sarima_period"] = c.sarima_period;
    j["forest"] = {{"trees", c.forest_trees}, {"min_node_size", c.forest_min_node_size}};
    j["boost"] = {{"rounds", c.boost_rounds},
                  {"learning_rate", c.boost_learning_rate},
                  {"max_depth", c.boost_max_depth},
                  {"lambda", c.boost_lambda},
                  {"min_child_weight", c.boost_min_child_weight}};
    j["realdata"] = {{"path", c.realdata.path},
                     {"delimiter", std::string(1, c.realdata.delimiter)},
                     {"columns", c.realdata.columns},
                     {"train_len", c.realdata.train_len},
                     {"horizon", c.realdata.horizon}};
    return j;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config file " + path.string());
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("<root>", std::string("invalid JSON in ") + path.string() + ": " + e.what());
    }
    if (j.is_null()) {
        j = json::object();
    }
    return config_from_json(j);
}

std::vector<eval::DataSetting> enumerate_data(const RunConfig& c) {
    std::vector<eval::DataSetting> out;
    for (const auto n : c.lengths) {
        for (const auto& name : c.sources) {
            const auto src = eval::parse_source(name);
            if (!src) {
                throw ConfigError("sources", "unknown source '" + name + "'");
            }
            eval::DataSetting d;
            d.source = *src;
            d.n = n;
            d.jump = dgp::JumpSpec{c.jump_sigma_p_sq, c.jump_rule};
            d.walk = dgp::RandomWalkSpec{c.snr};
            if (eval::is_queue(*src)) {
                out.push_back(d);
                continue;
            }
            for (const auto o : c.overlays) {
                d.overlay = o;
                out.push_back(d);
            }
        }
    }
    return out;
}

std::vector<eval::Setting> enumerate_settings(const RunConfig& c) {
    std::vector<eval::Setting> out;
    for (const auto& d : enumerate_data(c)) {
        for (const auto m : c.methods) {
            if (eval::is_ml(m)) {
                for (const int w : c.windows) {
                    out.push_back({d, m, w});
                }
            } else {
                out.push_back({d, m, c.windows.front()});
            }
        }
    }
    return out;
}

fs::path resolve_output_dir(const RunConfig& c) {
    fs::path dir(c.output_dir);
    if (dir.is_relative()) {
        if (const char* root = std::getenv(kOutputRootEnv); root && *root) {
            dir = fs::path(root) / dir;
        }
    }
    return dir;
}

std::vector<eval::MetricsRow> run_grid(const std::vector<eval::Setting>& settings, int replications,
                                       std::uint64_t seed_base, const eval::MethodConfig& cfg, eval::EvalMode mode,
                                       int threads, const Progress& progress) {
    if (replications < 1) {
        throw std::invalid_argument("run_grid: replications must be >= 1");
    }
    const std::size_t reps = static_cast<std::size_t>(replications);
    const std::size_t total = settings.size() * reps;
    std::vector<std::vector<eval::ReplicationRecord>> records(settings.size(),
                                                              std::vector<eval::ReplicationRecord>(reps));
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex report_mutex;
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= total) {
                return;
            }
            const std::size_t s = k / reps;
            const std::size_t r = k % reps;
            try {
                records[s][r] = eval::run_replication(settings[s], static_cast<int>(r), seed_base, cfg, mode,
                                                      replications);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next.store(total);
                return;
            }
            const std::size_t finished = done.fetch_add(1) + 1;
            if (progress) {
                std::lock_guard lock(report_mutex);
                progress(finished, total);
            }
        }
    };

    int workers = threads <= 0 ? static_cast<int>(std::max(1u, std::thread::hardware_concurrency())) : threads;
    workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), std::max<std::size_t>(total, 1)));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < workers; ++i) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    std::vector<eval::MetricsRow> rows;
    rows.reserve(settings.size());
    for (std::size_t s = 0; s < settings.size(); ++s) {
        rows.push_back(eval::assemble_row(settings[s], seed_base, std::move(records[s])));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

std::string format_double(double v) {
    if (std::isnan(v)) {
        return "NA";
    }
    if (std::isinf(v)) {
        return v > 0 ? "Inf" : "-Inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& s, int line, const std::string& column) {
    if (s == "NA") return std::numeric_limits<double>::quiet_NaN();
    if (s == "Inf") return std::numeric_limits<double>::infinity();
    if (s == "-Inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ParseError(line, column, "not a number: '" + s + "'");
    }
    return v;
}

long long parse_integer(const std::string& s, int line, const std::string& column) {
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ParseError(line, column, "not an integer: '" + s + "'");
    }
    return v;
}

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, delim)) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == delim) {
        out.emplace_back();
    }
    return out;
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return out;
}

const std::vector<std::string> kMetricsColumns = {
    "fingerprint", "source", "overlay",      "n",        "method",          "window", "differenced", "mse",
    "mape",        "replications", "skipped_zero", "fit_failures", "seed_base", "jump_rule", "jump_sigma_p_sq", "snr"};

}  // namespace

void write_metrics_csv(const std::vector<eval::MetricsRow>& rows, const fs::path& path) {
    std::ofstream out = open_out(path);
    for (std::size_t i = 0; i < kMetricsColumns.size(); ++i) {
        out << (i ? "," : "") << kMetricsColumns[i];
    }
    out << "\n";
    for (const auto& r : rows) {
        const auto& d = r.setting.data;
        out << r.setting.fingerprint() << ',' << eval::source_name(d.source) << ',' << dgp::to_string(d.overlay) << ','
            << d.n << ',' << eval::to_string(r.setting.method) << ',' << r.setting.window << ','
            << (eval::is_differenced(r.setting.method) ? 1 : 0) << ',' << format_double(r.metrics.mse) << ','
            << format_double(r.metrics.mape) << ',' << r.replications << ',' << r.metrics.n_skipped_zero_actual << ','
            << r.fit_failures << ',' << r.seed_base << ',' << jump_rule_name(d.jump.rule) << ','
            << format_double(d.jump.sigma_p_sq) << ',' << format_double(d.walk.snr_target) << "\n";
    }
}

std::vector<eval::MetricsRow> read_metrics_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open metrics file " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(1, "", "metrics file is empty");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split(line, ',');
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    for (const auto& name : kMetricsColumns) {
        if (!col.count(name)) {
            throw ParseError(1, name, "missing column");
        }
    }
    std::vector<eval::MetricsRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != header.size()) {
            throw ParseError(lineno, "", "expected " + std::to_string(header.size()) + " cells, found " +
                                             std::to_string(cells.size()));
        }
        auto cell = [&](const std::string& name) -> const std::string& { return cells[col.at(name)]; };
        eval::MetricsRow r;
        const auto src = eval::parse_source(cell("source"));
        if (!src) throw ParseError(lineno, "source", "unknown source '" + cell("source") + "'");
        const auto ov = dgp::parse_overlay(cell("overlay"));
        if (!ov) throw ParseError(lineno, "overlay", "unknown overlay '" + cell("overlay") + "'");
        const auto m = eval::parse_method(cell("method"));
        if (!m) throw ParseError(lineno, "method", "unknown method '" + cell("method") + "'");
        r.setting.data.source = *src;
        r.setting.data.overlay = *ov;
        r.setting.data.n = static_cast<Eigen::Index>(parse_integer(cell("n"), lineno, "n"));
        r.setting.data.jump.rule =
            cell("jump_rule") == "per_step" ? dgp::JumpRule::RatePerStep : dgp::JumpRule::ExpectedTenJumps;
        r.setting.data.jump.sigma_p_sq = parse_double(cell("jump_sigma_p_sq"), lineno, "jump_sigma_p_sq");
        r.setting.data.walk.snr_target = parse_double(cell("snr"), lineno, "snr");
        r.setting.method = *m;
        r.setting.window = static_cast<int>(parse_integer(cell("window"), lineno, "window"));
        r.metrics.mse = parse_double(cell("mse"), lineno, "mse");
        r.metrics.mape = parse_double(cell("mape"), lineno, "mape");
        r.replications = static_cast<int>(parse_integer(cell("replications"), lineno, "replications"));
        r.metrics.n_skipped_zero_actual =
            static_cast<Eigen::Index>(parse_integer(cell("skipped_zero"), lineno, "skipped_zero"));
        r.metrics.n_evaluated = r.replications - r.metrics.n_skipped_zero_actual;
        r.fit_failures = static_cast<int>(parse_integer(cell("fit_failures"), lineno, "fit_failures"));
        r.seed_base = static_cast<std::uint64_t>(parse_integer(cell("seed_base"), lineno, "seed_base"));
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_rank_csv(const eval::RankTable& table, const fs::path& path) {
    std::ofstream out = open_out(path);
    out << "method";
    for (const auto g : table.groups) out << ',' << eval::to_string(g);
    out << "\n";
    for (std::size_t m = 0; m < table.methods.size(); ++m) {
        out << eval::display_name(table.methods[m]);
        for (std::size_t g = 0; g < table.groups.size(); ++g) {
            out << ',' << format_double(table.median_rank[m][g]);
        }
        out << "\n";
    }
}

void write_log_csv(const std::vector<eval::MetricsRow>& rows, const fs::path& path) {
    std::ofstream out = open_out(path);
    out << "fingerprint,replication,actual,predicted,fallback\n";
    for (const auto& r : rows) {
        const std::string fp = r.setting.fingerprint();
        for (std::size_t i = 0; i < r.log.size(); ++i) {
            out << fp << ',' << i << ',' << format_double(r.log[i].actual) << ','
                << format_double(r.log[i].predicted) << ',' << (r.log[i].fallback ? 1 : 0) << "\n";
        }
    }
}

std::string file_checksum(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path.string());
    }
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(bytes)));
    return buf;
}

json make_manifest(const RunConfig& c, const std::map<std::string, std::string>& outputs) {
    json j;
    j["software"] = "tsbench";
    j["version"] = std::string(kVersion);
    j["seed_base"] = c.seed_base;
    j["config"] = config_to_json(c);
    j["outputs"] = outputs;
    return j;
}

namespace {

std::vector<fs::path> write_series_files(const RunConfig& c, const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& d : enumerate_data(c)) {
        const std::uint64_t seed = eval::replication_seed(c.seed_base, d, 0);
        const TimeSeries s = eval::simulate(d, d.n, seed);
        std::string stem = eval::source_name(d.source);
        if (!eval::is_queue(d.source)) stem += "_" + std::string(dgp::to_string(d.overlay));
        stem += "_n" + std::to_string(d.n) + "_seed" + std::to_string(seed);
        const fs::path path = dir / (stem + ".csv");
        std::ofstream out = open_out(path);
        out << "t,value\n";
        for (Eigen::Index t = 0; t < s.size(); ++t) {
            out << (t + 1) << ',' << format_double(s[t]) << "\n";
        }
        files.push_back(path);
    }
    return files;
}

}  // namespace

RunSummary run(const RunConfig& c, const Progress& progress) {
    RunSummary summary;
    summary.output_dir = resolve_output_dir(c);
    fs::create_directories(summary.output_dir);
    const fs::path dir = summary.output_dir;
    const eval::MethodConfig cfg = c.method_config();

    switch (c.mode) {
        case Mode::Simulate: {
            summary.files = write_series_files(c, dir / "series");
            summary.settings = enumerate_data(c).size();
            break;
        }
        case Mode::Evaluate: {
            const auto settings = enumerate_settings(c);
            summary.settings = settings.size();
            const auto rows = run_grid(settings, c.replications, c.seed_base, cfg, c.eval_mode, c.threads, progress);
            for (const auto& r : rows) summary.fit_failures += r.fit_failures;
            write_metrics_csv(rows, dir / "metrics.csv");
            write_log_csv(rows, dir / "replications.csv");
            summary.files.push_back(dir / "metrics.csv");
            summary.files.push_back(dir / "replications.csv");
            if (c.methods.size() >= 2) {
                try {
                    write_rank_csv(eval::median_rank_table(rows, c.methods, c.windows.front()), dir / "ranks.csv");
                    summary.files.push_back(dir / "ranks.csv");
                } catch (const eval::IncompleteGridError&) {
                }
            }
            break;
        }
        case Mode::Rank: {
            const auto rows = read_metrics_csv(dir / "metrics.csv");
            summary.settings = rows.size();
            std::vector<eval::Method> methods;
            for (const auto m : eval::kAllMethods) {
                if (std::any_of(rows.begin(), rows.end(), [&](const auto& r) { return r.setting.method == m; })) {
                    methods.push_back(m);
                }
            }
            write_rank_csv(eval::median_rank_table(rows, methods, c.windows.front()), dir / "ranks.csv");
            summary.files.push_back(dir / "ranks.csv");
            break;
        }
        case Mode::RealData: {
            const DemandDataset data = load_demand_csv(c.realdata.path, c.realdata.columns, c.realdata.delimiter);
            const auto rows =
                evaluate_demand(data, c.methods, c.realdata.train_len, c.realdata.horizon, cfg, c.seed_base);
            for (const auto& r : rows) summary.fit_failures += r.result.fit_failures;
            summary.settings = rows.size();
            write_realdata_csv(rows, dir / "realdata.csv");
            summary.files.push_back(dir / "realdata.csv");
            break;
        }
        case Mode::Plot: {
            const auto rows = read_metrics_csv(dir / "metrics.csv");
            summary.settings = rows.size();
            for (auto& p : emit_plots(rows, dir / "plots")) summary.files.push_back(p);
            break;
        }
    }

    std::map<std::string, std::string> outputs;
    for (const auto& f : summary.files) {
        outputs[fs::relative(f, dir).generic_string()] = file_checksum(f);
    }
    std::ofstream out = open_out(dir / "manifest.json");
    out << make_manifest(c, outputs).dump(2) << "\n";
    summary.files.push_back(dir / "manifest.json");
    return summary;
}

}  // namespace tsbench::harness
