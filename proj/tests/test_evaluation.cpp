#include "oracles.hpp"

#include "tsbench/evaluation.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <set>

using namespace tsbench;
using namespace tsbench::eval;
using Catch::Approx;

namespace {

MethodConfig light_config() {
    MethodConfig cfg;
    cfg.forest.trees = 30;
    cfg.boost.rounds = 20;
    return cfg;
}

DataSetting data_of(Source src, dgp::OverlayKind overlay, Eigen::Index n) {
    DataSetting d;
    d.source = src;
    d.overlay = overlay;
    d.n = n;
    return d;
}

MetricsRow row_with(const DataSetting& d, Method m, double mse) {
    MetricsRow r;
    r.setting = {d, m, 8};
    r.metrics.mse = mse;
    r.replications = 1;
    return r;
}

}  // namespace

TEST_CASE("method names round trip", "[eval]") {
    std::set<std::string> ids;
    for (const auto m : kAllMethods) {
        ids.insert(std::string(to_string(m)));
        CHECK(parse_method(to_string(m)) == m);
        CHECK(parse_method(display_name(m)) == m);
    }
    CHECK(ids.size() == 8);
    CHECK(display_name(Method::RandomForestDiff) == "Random Forest Diff");
    CHECK_FALSE(parse_method("lstm").has_value());
}

TEST_CASE("full grid has 150 data settings", "[eval]") {
    const auto grid = full_grid();
    CHECK(grid.size() == 150);
    std::set<std::string> fps;
    for (const auto& d : grid) fps.insert(d.fingerprint());
    CHECK(fps.size() == 150);
    CHECK(full_grid({100}).size() == 50);
    std::map<SettingGroup, int> groups;
    for (const auto& d : full_grid({100})) groups[group_of(d)]++;
    CHECK(groups[SettingGroup::Queueing] == 2);
    CHECK(groups[SettingGroup::NoComplexity] == 12);
    CHECK(groups[SettingGroup::Jump] == 12);
    CHECK(groups[SettingGroup::RandomWalk] == 12);
    CHECK(groups[SettingGroup::Both] == 12);
}

TEST_CASE("replications share the series across methods", "[eval]") {
    const DataSetting d = data_of(dgp::DgpKind::STAR1, dgp::OverlayKind::Both, 100);
    const MetricsRow a = run_setting({d, Method::Naive, 8}, 5, 2024);
    const MetricsRow b = run_setting({d, Method::Arima, 8}, 5, 2024);
    for (int r = 0; r < 5; ++r) CHECK(a.log[static_cast<std::size_t>(r)].actual == b.log[static_cast<std::size_t>(r)].actual);
}

TEST_CASE("naive MSE on AR matches the Yule-Walker oracle", "[eval][oracle]") {
    const auto g = oracle::ar_autocovariances({0.5, 0.45});
    const double expected = 2.0 * g[0] - 2.0 * g[1];
    const MetricsRow row = run_setting({data_of(dgp::DgpKind::AR, dgp::OverlayKind::None, 1000), Method::Naive, 8},
                                       1000, 2024);
    CHECK(row.metrics.mse == Approx(expected).epsilon(0.10));
}

TEST_CASE("run_setting is deterministic and prefix-stable", "[eval][property]") {
    const Setting s{data_of(dgp::DgpKind::NMA, dgp::OverlayKind::Jump, 100), Method::XGBoostDiff, 8};
    const MethodConfig cfg = light_config();
    const MetricsRow a = run_setting(s, 1, 7, cfg);
    const MetricsRow b = run_setting(s, 1, 7, cfg);
    CHECK(a.metrics.mse == b.metrics.mse);
    CHECK(a.log.front().predicted == b.log.front().predicted);

    const MetricsRow r4 = run_setting(s, 4, 7, cfg);
    const MetricsRow r8 = run_setting(s, 8, 7, cfg);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(r4.log[i].actual == r8.log[i].actual);
        CHECK(r4.log[i].predicted == r8.log[i].predicted);
    }
    CHECK(run_replication(s, 3, 7, cfg).predicted == r8.log[3].predicted);
}

TEST_CASE("metrics equal brute-force recomputation from the log", "[eval][oracle]") {
    const Setting s{data_of(dgp::DgpKind::SAR2, dgp::OverlayKind::None, 100), Method::Tbats, 8};
    const MetricsRow row = run_setting(s, 12, 99);
    double sq = 0.0, ape = 0.0;
    int used = 0;
    for (const auto& r : row.log) {
        sq += (r.actual - r.predicted) * (r.actual - r.predicted);
        if (r.actual != 0.0) {
            ape += 100.0 * std::abs(r.actual - r.predicted) / std::abs(r.actual);
            ++used;
        }
    }
    CHECK(row.metrics.mse == Approx(sq / 12.0).epsilon(1e-12));
    CHECK(row.metrics.mape == Approx(ape / used).epsilon(1e-12));
    CHECK(row.replications == 12);
    CHECK(row.seed_base == 99);
    CHECK_THROWS_AS(run_setting(s, 0, 1), std::invalid_argument);
}

TEST_CASE("rolling mode rolls one path forward", "[eval]") {
    const Setting s{data_of(dgp::DgpKind::AR, dgp::OverlayKind::None, 50), Method::Naive, 8};
    const MetricsRow row = run_setting(s, 5, 3, {}, EvalMode::Rolling);
    for (std::size_t r = 1; r < row.log.size(); ++r) CHECK(row.log[r].predicted == row.log[r - 1].actual);
    CHECK(run_replication(s, 2, 3, {}, EvalMode::Rolling, 5).actual == row.log[2].actual);
}

TEST_CASE("fit failures fall back to the naive forecast", "[eval]") {
    // Too short for a window-8 frame: the forest cannot be fitted.
    const TimeSeries tiny({1.0, 2.0, 3.0, 4.0});
    const Forecast f = forecast_next_or_fallback(Method::RandomForest, tiny, {}, 1);
    CHECK(f.fallback);
    CHECK(f.value == 4.0);
    CHECK_THROWS(forecast_next(Method::RandomForest, tiny, {}, 1));
}

TEST_CASE("rank examples", "[rank]") {
    CHECK(rank_values({2.0, 1.0, 3.0}) == std::vector<double>{2, 1, 3});
    CHECK(rank_values({1.0, 1.0, 3.0}) == std::vector<double>{1.5, 1.5, 3});
    CHECK(rank_values({4.0, 4.0, 4.0}) == std::vector<double>{2, 2, 2});

    const DataSetting a = data_of(dgp::DgpKind::AR, dgp::OverlayKind::None, 100);
    const DataSetting b = data_of(dgp::DgpKind::AR, dgp::OverlayKind::Jump, 100);
    CHECK(rank_methods({row_with(a, Method::Naive, 2.0), row_with(a, Method::Arima, 1.0)}) ==
          std::vector<double>{2, 1});
    CHECK_THROWS_AS(rank_methods({row_with(a, Method::Naive, 2.0), row_with(b, Method::Arima, 1.0)}),
                    std::invalid_argument);
    CHECK_THROWS_AS(rank_methods({row_with(a, Method::Naive, 2.0)}), std::invalid_argument);
}

TEST_CASE("ranks are valid permutations under ties", "[rank][property]") {
    Rng rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        const int k = 2 + static_cast<int>(rng.below(8));
        std::vector<double> v(static_cast<std::size_t>(k));
        for (auto& x : v) x = static_cast<double>(rng.below(4));
        const auto r = rank_values(v);
        CHECK(std::accumulate(r.begin(), r.end(), 0.0) == Approx(k * (k + 1) / 2.0));
        for (std::size_t i = 0; i < v.size(); ++i) {
            for (std::size_t j = 0; j < v.size(); ++j) {
                if (v[i] < v[j]) CHECK(r[i] < r[j]);
                if (v[i] == v[j]) CHECK(r[i] == r[j]);
            }
        }
    }
}

TEST_CASE("median rank table", "[rank]") {
    std::vector<MetricsRow> rows;
    const std::vector<Method> methods = {Method::RandomForestDiff, Method::Naive, Method::Arima};
    // Single queueing setting; three no-complexity settings.
    const DataSetting q = data_of(queue::QueueSpec::mm1(), dgp::OverlayKind::None, 100);
    rows.push_back(row_with(q, Method::RandomForestDiff, 1.0));
    rows.push_back(row_with(q, Method::Naive, 3.0));
    rows.push_back(row_with(q, Method::Arima, 2.0));
    const std::vector<std::array<double, 3>> mses = {{{1, 3, 2}}, {{3, 2, 1}}, {{2, 3, 1}}};
    const std::array<dgp::DgpKind, 3> kinds = {dgp::DgpKind::AR, dgp::DgpKind::BL1, dgp::DgpKind::BL2};
    for (std::size_t i = 0; i < 3; ++i) {
        const DataSetting d = data_of(kinds[i], dgp::OverlayKind::None, 100);
        for (std::size_t m = 0; m < 3; ++m) rows.push_back(row_with(d, methods[m], mses[i][m]));
    }
    // A window-4 ML row is ignored.
    MetricsRow w4 = row_with(q, Method::RandomForestDiff, 100.0);
    w4.setting.window = 4;
    rows.push_back(w4);

    const RankTable t = median_rank_table(rows, methods);
    CHECK(t.at(Method::RandomForestDiff, SettingGroup::Queueing) == 1.0);
    CHECK(t.at(Method::Naive, SettingGroup::Queueing) == 3.0);
    CHECK(t.at(Method::RandomForestDiff, SettingGroup::NoComplexity) == 2.0);
    CHECK(t.at(Method::Naive, SettingGroup::NoComplexity) == 3.0);
    CHECK(t.at(Method::Arima, SettingGroup::NoComplexity) == 1.0);
    CHECK(std::isnan(t.at(Method::Arima, SettingGroup::Jump)));
    CHECK(t.settings_per_group.at(SettingGroup::NoComplexity) == 3);

    rows.pop_back();
    rows.pop_back();
    try {
        median_rank_table(rows, methods);
        FAIL("expected IncompleteGridError");
    } catch (const IncompleteGridError& e) {
        REQUIRE(e.missing().size() == 1);
        CHECK(e.missing().front().find("arima") != std::string::npos);
    }
}

TEST_CASE("rolling cross-validation", "[eval]") {
    Eigen::VectorXd ramp(60);
    for (int i = 0; i < 60; ++i) ramp[i] = i + 1.0;
    const RollingResult r = rolling_cv(TimeSeries(ramp), Method::Naive);
    CHECK(r.metrics.mse == 1.0);
    double expected = 0.0;
    for (int v = 51; v <= 60; ++v) expected += 100.0 / v;
    CHECK(r.metrics.mape == Approx(expected / 10.0).epsilon(1e-12));
    CHECK(r.metrics.mape == Approx(1.8067).margin(1e-4));
    CHECK_THROWS_AS(rolling_cv(TimeSeries(ramp), Method::Naive, 50, 0), std::invalid_argument);
    CHECK_THROWS_AS(rolling_cv(TimeSeries(ramp), Method::Naive, 55, 10), std::invalid_argument);
}
