#include "tsbench/evaluation.hpp"

#include "tsbench/arima.hpp"
#include "tsbench/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tsbench::eval {

namespace {

constexpr std::array<std::string_view, 8> kMethodIds = {"rf", "rf_diff", "xgb", "xgb_diff",
                                                        "arima", "sarima", "tbats", "naive"};
constexpr std::array<std::string_view, 8> kMethodNames = {
    "Random Forest", "Random Forest Diff", "XGBoost", "XGBoost Diff", "ARIMA", "SARIMA", "TBATS", "Naive"};
constexpr std::array<std::string_view, 5> kGroupNames = {"queueing", "no_complexity", "jump", "random_walk",
                                                         "both"};

std::size_t index_of(Method m) { return static_cast<std::size_t>(m); }

}  // namespace

std::string_view to_string(Method m) noexcept { return kMethodIds[index_of(m)]; }
std::string_view display_name(Method m) noexcept { return kMethodNames[index_of(m)]; }

std::optional<Method> parse_method(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kMethodIds.size(); ++i) {
        if (kMethodIds[i] == name || kMethodNames[i] == name) {
            return static_cast<Method>(i);
        }
    }
    return std::nullopt;
}

bool is_ml(Method m) noexcept {
    return m == Method::RandomForest || m == Method::RandomForestDiff || m == Method::XGBoost ||
           m == Method::XGBoostDiff;
}

bool is_differenced(Method m) noexcept { return m == Method::RandomForestDiff || m == Method::XGBoostDiff; }

double forecast_next(Method method, const TimeSeries& train, const MethodConfig& cfg, std::uint64_t seed) {
    double value = 0.0;
    switch (method) {
        case Method::Naive:
            value = models::naive_forecast(train);
            break;
        case Method::Arima:
            value = models::fit_arima(train).forecast_one();
            break;
        case Method::Sarima:
            value = models::fit_sarima(train, cfg.sarima_period).forecast_one();
            break;
        case Method::Tbats:
            value = models::fit_tbats_lite(train, cfg.tbats).forecast_one();
            break;
        case Method::RandomForest:
        case Method::RandomForestDiff: {
            const bool diff = is_differenced(method);
            const ml::SupervisedFrame frame = ml::build_frame(train, cfg.window, diff);
            const ml::ForestModel model = ml::fit_forest(frame, seed, cfg.forest);
            value = ml::ml_forecast_one(model, train, cfg.window, diff);
            break;
        }
        case Method::XGBoost:
        case Method::XGBoostDiff: {
            const bool diff = is_differenced(method);
            const ml::SupervisedFrame frame = ml::build_frame(train, cfg.window, diff);
            const ml::BoostedModel model = ml::fit_boosted(frame, seed, cfg.boost);
            value = ml::ml_forecast_one(model, train, cfg.window, diff);
            break;
        }
    }
    if (!std::isfinite(value)) {
        throw std::runtime_error(std::string(to_string(method)) + ": non-finite forecast");
    }
    return value;
}

Forecast forecast_next_or_fallback(Method method, const TimeSeries& train, const MethodConfig& cfg,
                                   std::uint64_t seed) {
    try {
        return {forecast_next(method, train, cfg, seed), false};
    } catch (const std::exception&) {
        return {models::naive_forecast(train), true};
    }
}

// ---------------------------------------------------------------------------
// Settings
// ---------------------------------------------------------------------------

std::string source_name(const Source& s) {
    if (const auto* k = std::get_if<dgp::DgpKind>(&s)) {
        return std::string(dgp::to_string(*k));
    }
    return std::get<queue::QueueSpec>(s).name();
}

std::optional<Source> parse_source(std::string_view name) {
    if (const auto k = dgp::parse_dgp(name)) {
        return Source{*k};
    }
    if (name == "MM1") {
        return Source{queue::QueueSpec::mm1()};
    }
    if (name == "MM2") {
        return Source{queue::QueueSpec::mm2()};
    }
    return std::nullopt;
}

bool is_queue(const Source& s) noexcept { return std::holds_alternative<queue::QueueSpec>(s); }

std::string DataSetting::fingerprint() const {
    std::string fp = source_name(source);
    if (!is_queue(source)) {
        fp += "|" + std::string(dgp::to_string(overlay));
    } else {
        const auto& q = std::get<queue::QueueSpec>(source);
        if (q.arrival_rate != 4.0 || q.service_rate != 2.0) {
            fp += "|la=" + std::to_string(q.arrival_rate) + "|mu=" + std::to_string(q.service_rate);
        }
    }
    fp += "|n=" + std::to_string(n);
    if (overlay == dgp::OverlayKind::Jump || overlay == dgp::OverlayKind::Both) {
        if (jump.rule != dgp::JumpRule::ExpectedTenJumps) fp += "|jump_rule=per_step";
        if (jump.sigma_p_sq != 1.0) fp += "|sp2=" + std::to_string(jump.sigma_p_sq);
    }
    if ((overlay == dgp::OverlayKind::RandomWalk || overlay == dgp::OverlayKind::Both) && walk.snr_target != 4.0) {
        fp += "|snr=" + std::to_string(walk.snr_target);
    }
    return fp;
}

std::string Setting::fingerprint() const {
    std::string fp = data.fingerprint() + "|" + std::string(to_string(method));
    if (is_ml(method)) {
        fp += "|w=" + std::to_string(window);
    }
    return fp;
}

std::vector<DataSetting> full_grid(const std::vector<Eigen::Index>& lengths) {
    std::vector<DataSetting> grid;
    for (const auto n : lengths) {
        for (const auto kind : dgp::kAllDgps) {
            for (const auto overlay : dgp::kAllOverlays) {
                DataSetting d;
                d.source = kind;
                d.overlay = overlay;
                d.n = n;
                grid.push_back(d);
            }
        }
        for (const auto& q : {queue::QueueSpec::mm1(), queue::QueueSpec::mm2()}) {
            DataSetting d;
            d.source = q;
            d.n = n;
            grid.push_back(d);
        }
    }
    return grid;
}

TimeSeries simulate(const DataSetting& data, Eigen::Index len, std::uint64_t seed) {
    if (const auto* q = std::get_if<queue::QueueSpec>(&data.source)) {
        return queue::simulate_queue(*q, len, seed);
    }
    const auto kind = std::get<dgp::DgpKind>(data.source);
    const TimeSeries clean = dgp::generate(kind, dgp::GenConfig{len, 100, seed});
    const dgp::OverlaySpec spec = dgp::OverlaySpec::of(data.overlay, data.jump, data.walk);
    return dgp::apply_overlay(clean, spec, data.n, seed);
}

std::uint64_t replication_seed(std::uint64_t seed_base, const DataSetting& data, std::uint64_t r) {
    return derive_seed(seed_base, fnv1a(data.fingerprint()), r);
}

MetricPair aggregate(const std::vector<ReplicationRecord>& log) {
    Eigen::VectorXd actual(static_cast<Eigen::Index>(log.size()));
    Eigen::VectorXd predicted(static_cast<Eigen::Index>(log.size()));
    for (std::size_t i = 0; i < log.size(); ++i) {
        actual[static_cast<Eigen::Index>(i)] = log[i].actual;
        predicted[static_cast<Eigen::Index>(i)] = log[i].predicted;
    }
    return score(actual, predicted);
}

ReplicationRecord run_replication(const Setting& setting, int r, std::uint64_t seed_base, const MethodConfig& cfg_in,
                                  EvalMode mode, int replications) {
    if (r < 0 || (mode == EvalMode::Rolling && r >= replications)) {
        throw std::out_of_range("run_replication: replication index out of range");
    }
    MethodConfig cfg = cfg_in;
    cfg.window = setting.window;
    const Eigen::Index n = setting.data.n;
    const auto idx = static_cast<std::uint64_t>(r);

    std::uint64_t seed = 0;
    double actual = 0.0;
    std::optional<TimeSeries> train;
    if (mode == EvalMode::Replications) {
        seed = replication_seed(seed_base, setting.data, idx);
        const TimeSeries series = simulate(setting.data, n + 1, seed);
        train = series.head(n);
        actual = series[n];
    } else {
        seed = replication_seed(seed_base, setting.data, 0);
        const TimeSeries series = simulate(setting.data, n + replications, seed);
        train = series.segment(r, n);
        actual = series[r + n];
    }
    const std::uint64_t model_seed = derive_seed(seed, setting.fingerprint(), idx);
    const Forecast f = forecast_next_or_fallback(setting.method, *train, cfg, model_seed);
    return {actual, f.value, f.fallback};
}

MetricsRow assemble_row(const Setting& setting, std::uint64_t seed_base, std::vector<ReplicationRecord> log) {
    if (log.empty()) {
        throw std::invalid_argument("assemble_row: empty replication log");
    }
    MetricsRow row;
    row.setting = setting;
    row.replications = static_cast<int>(log.size());
    row.seed_base = seed_base;
    for (const auto& rec : log) {
        row.fit_failures += rec.fallback ? 1 : 0;
    }
    row.metrics = aggregate(log);
    row.log = std::move(log);
    return row;
}

MetricsRow run_setting(const Setting& setting, int replications, std::uint64_t seed_base, const MethodConfig& cfg,
                       EvalMode mode) {
    if (replications < 1) {
        throw std::invalid_argument("run_setting: replications must be >= 1");
    }
    std::vector<ReplicationRecord> log;
    log.reserve(static_cast<std::size_t>(replications));
    if (mode == EvalMode::Replications) {
        for (int r = 0; r < replications; ++r) {
            log.push_back(run_replication(setting, r, seed_base, cfg, mode, replications));
        }
    } else {
        // One shared path; simulate it once rather than per replication.
        MethodConfig local = cfg;
        local.window = setting.window;
        const Eigen::Index n = setting.data.n;
        const std::uint64_t seed = replication_seed(seed_base, setting.data, 0);
        const TimeSeries series = simulate(setting.data, n + replications, seed);
        for (int r = 0; r < replications; ++r) {
            const auto idx = static_cast<std::uint64_t>(r);
            const Forecast f = forecast_next_or_fallback(setting.method, series.segment(r, n), local,
                                                         derive_seed(seed, setting.fingerprint(), idx));
            log.push_back({series[r + n], f.value, f.fallback});
        }
    }
    return assemble_row(setting, seed_base, std::move(log));
}

// ---------------------------------------------------------------------------
// Ranking
// ---------------------------------------------------------------------------

std::vector<double> rank_values(const std::vector<double>& mse) {
    const std::size_t k = mse.size();
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mse[a] < mse[b]; });
    std::vector<double> ranks(k, 0.0);
    std::size_t i = 0;
    while (i < k) {
        std::size_t j = i;
        while (j + 1 < k && mse[order[j + 1]] == mse[order[i]]) {
            ++j;
        }
        const double avg = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t t = i; t <= j; ++t) {
            ranks[order[t]] = avg;
        }
        i = j + 1;
    }
    return ranks;
}

std::vector<double> rank_methods(const std::vector<MetricsRow>& rows) {
    if (rows.size() < 2) {
        throw std::invalid_argument("rank_methods: need at least two methods");
    }
    const std::string fp = rows.front().setting.data.fingerprint();
    std::vector<double> mse;
    for (const auto& r : rows) {
        if (r.setting.data.fingerprint() != fp) {
            throw std::invalid_argument("rank_methods: rows mix settings '" + fp + "' and '" +
                                        r.setting.data.fingerprint() + "'");
        }
        mse.push_back(r.metrics.mse);
    }
    return rank_values(mse);
}

std::string_view to_string(SettingGroup g) noexcept { return kGroupNames[static_cast<std::size_t>(g)]; }

SettingGroup group_of(const DataSetting& d) noexcept {
    if (is_queue(d.source)) {
        return SettingGroup::Queueing;
    }
    switch (d.overlay) {
        case dgp::OverlayKind::None:
            return SettingGroup::NoComplexity;
        case dgp::OverlayKind::Jump:
            return SettingGroup::Jump;
        case dgp::OverlayKind::RandomWalk:
            return SettingGroup::RandomWalk;
        case dgp::OverlayKind::Both:
            return SettingGroup::Both;
    }
    return SettingGroup::NoComplexity;
}

double RankTable::at(Method m, SettingGroup g) const {
    const auto mi = std::find(methods.begin(), methods.end(), m);
    const auto gi = std::find(groups.begin(), groups.end(), g);
    if (mi == methods.end() || gi == groups.end()) {
        throw std::out_of_range("RankTable::at: method or group not in table");
    }
    return median_rank[static_cast<std::size_t>(mi - methods.begin())][static_cast<std::size_t>(gi - groups.begin())];
}

IncompleteGridError::IncompleteGridError(std::vector<std::string> missing)
    : std::runtime_error("incomplete grid: " + std::to_string(missing.size()) + " missing cell(s), first: " +
                         (missing.empty() ? std::string("-") : missing.front())),
      missing_(std::move(missing)) {}

namespace {

double median(std::vector<double> v) {
    if (v.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

RankTable median_rank_table(const std::vector<MetricsRow>& rows, const std::vector<Method>& methods, int window) {
    // data fingerprint -> method index -> row
    std::map<std::string, std::vector<const MetricsRow*>> cells;
    std::map<std::string, SettingGroup> group_by_fp;
    for (const auto& row : rows) {
        const auto it = std::find(methods.begin(), methods.end(), row.setting.method);
        if (it == methods.end()) {
            continue;
        }
        if (is_ml(row.setting.method) && row.setting.window != window) {
            continue;
        }
        const std::string fp = row.setting.data.fingerprint();
        auto& slot = cells[fp];
        slot.resize(methods.size(), nullptr);
        slot[static_cast<std::size_t>(it - methods.begin())] = &row;
        group_by_fp[fp] = group_of(row.setting.data);
    }

    std::vector<std::string> missing;
    for (const auto& [fp, slot] : cells) {
        for (std::size_t m = 0; m < methods.size(); ++m) {
            if (!slot[m]) {
                missing.push_back(fp + " :: " + std::string(to_string(methods[m])));
            }
        }
    }
    if (!missing.empty()) {
        throw IncompleteGridError(std::move(missing));
    }

    RankTable table;
    table.methods = methods;
    table.groups.assign(kAllGroups.begin(), kAllGroups.end());
    std::vector<std::vector<std::vector<double>>> ranks(methods.size(),
                                                        std::vector<std::vector<double>>(table.groups.size()));
    for (const auto& [fp, slot] : cells) {
        std::vector<double> mse;
        for (const auto* r : slot) mse.push_back(r->metrics.mse);
        const auto rk = rank_values(mse);
        const auto g = static_cast<std::size_t>(group_by_fp.at(fp));
        table.settings_per_group[group_by_fp.at(fp)] += 1;
        for (std::size_t m = 0; m < methods.size(); ++m) {
            ranks[m][g].push_back(rk[m]);
        }
    }
    table.median_rank.assign(methods.size(), std::vector<double>(table.groups.size()));
    for (std::size_t m = 0; m < methods.size(); ++m) {
        for (std::size_t g = 0; g < table.groups.size(); ++g) {
            table.median_rank[m][g] = median(ranks[m][g]);
        }
    }
    return table;
}

// ---------------------------------------------------------------------------
// Rolling-origin evaluation
// ---------------------------------------------------------------------------

RollingResult rolling_cv(const TimeSeries& series, Method method, int train_len, int horizon,
                         const MethodConfig& cfg, std::uint64_t seed) {
    if (horizon < 1) {
        throw std::invalid_argument("rolling_cv: horizon must be >= 1");
    }
    if (train_len < 1 || series.size() < train_len + horizon) {
        throw std::invalid_argument("rolling_cv: series shorter than train_len + horizon");
    }
    RollingResult out;
    for (int k = 0; k < horizon; ++k) {
        const TimeSeries train = series.head(train_len + k);
        const double actual = series[train_len + k];
        const Forecast f = forecast_next_or_fallback(method, train, cfg,
                                                     derive_seed(seed, to_string(method), static_cast<std::uint64_t>(k)));
        out.fit_failures += f.fallback ? 1 : 0;
        out.log.push_back({actual, f.value, f.fallback});
    }
    out.metrics = aggregate(out.log);
    return out;
}

}  // namespace tsbench::eval
