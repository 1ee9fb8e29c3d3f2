#include "oracles.hpp"

#include "tsbench/dgp.hpp"
#include "tsbench/random.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

using namespace tsbench;
using namespace tsbench::dgp;
using Catch::Approx;

TEST_CASE("twelve named processes", "[dgp]") {
    CHECK(kAllDgps.size() == 12);
    std::set<std::string> names;
    for (const auto k : kAllDgps) {
        names.insert(std::string(to_string(k)));
        CHECK(parse_dgp(to_string(k)) == k);
    }
    CHECK(names.size() == 12);
    CHECK_FALSE(parse_dgp("AR3").has_value());
}

TEST_CASE("noise-free AR recursion from unit history", "[dgp]") {
    RecursionState init;
    init.x1 = 1.0;
    init.x2 = 1.0;
    const Eigen::VectorXd x = iterate(DgpKind::AR, Eigen::VectorXd::Zero(5), init);
    CHECK(x[0] == Approx(0.95).epsilon(1e-15));
    CHECK(x[1] == Approx(0.925).epsilon(1e-15));
    CHECK(x[2] == Approx(0.89).epsilon(1e-15));
    for (int t = 2; t < 5; ++t) {
        CHECK(x[t] == Approx(0.5 * x[t - 1] + 0.45 * x[t - 2]).epsilon(1e-15));
    }
}

TEST_CASE("noise-free SAR1 sits at the sign fixed point", "[dgp]") {
    RecursionState init;
    init.x1 = 0.5;
    const Eigen::VectorXd x = iterate(DgpKind::SAR1, Eigen::VectorXd::Zero(20), init);
    CHECK((x.array() == 1.0).all());
}

TEST_CASE("zero noise from zero state gives the zero path", "[dgp]") {
    for (const auto k : kAllDgps) {
        const Eigen::VectorXd x = iterate(k, Eigen::VectorXd::Zero(30));
        INFO(to_string(k));
        if (k == DgpKind::STAR2) {
            // The 0.1 intercept inside the smooth-transition term moves the path off zero.
            CHECK(x.cwiseAbs().maxCoeff() > 0.0);
        } else {
            CHECK(x.cwiseAbs().maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("recursions match hand formulas for one step", "[dgp]") {
    RecursionState s;
    s.x1 = 0.7;
    s.x2 = -1.3;
    s.e1 = 0.4;
    s.e2 = -0.9;
    const double e = 0.25;
    auto logistic = [](double z) { return 1.0 / (1.0 + std::exp(-10.0 * z)); };
    CHECK(step(DgpKind::AR, s, e) == Approx(0.5 * 0.7 + 0.45 * -1.3 + e));
    CHECK(step(DgpKind::BL1, s, e) == Approx(0.7 * 0.7 * -0.9 + e));
    CHECK(step(DgpKind::BL2, s, e) == Approx(0.4 * 0.7 - 0.3 * -1.3 + 0.5 * -1.3 * 0.4 + e));
    CHECK(step(DgpKind::NAR1, s, e) == Approx(0.7 * 0.7 / (0.7 + 2) + e));
    CHECK(step(DgpKind::NAR2, s, e) == Approx(0.7 * 0.7 / 2.7 + 0.35 * 1.3 / 3.3 + e));
    CHECK(step(DgpKind::NMA, s, e) == Approx(e - 0.3 * 0.4 + 0.2 * -0.9 + 0.4 * 0.4 * -0.9 - 0.25 * 0.81));
    CHECK(step(DgpKind::SAR1, s, e) == Approx(1.0 + e));
    CHECK(step(DgpKind::SAR2, s, e) == Approx(-1.0 + e));
    CHECK(step(DgpKind::STAR1, s, e) == Approx(0.8 * e - 0.8 * 0.4 * logistic(0.7) + e));
    CHECK(step(DgpKind::STAR2, s, e) ==
          Approx(0.3 * 0.7 + 0.6 * -1.3 + (0.1 - 0.9 * 0.7 + 0.8 * -1.3) * logistic(0.7) + e));
    CHECK(step(DgpKind::TAR1, s, e) == Approx(0.9 * 0.7 + e));
    CHECK(step(DgpKind::TAR2, s, e) == Approx(0.9 * 0.7 + 0.05 * -1.3 + e));
    RecursionState far = s;
    far.x1 = 1.5;
    CHECK(step(DgpKind::TAR1, far, e) == Approx(-0.3 * 1.5 - e));
    CHECK(step(DgpKind::TAR2, far, e) == Approx(-0.3 * 1.5 + 0.65 * -1.3 - e));
    RecursionState zero;
    CHECK(step(DgpKind::SAR1, zero, e) == Approx(e));
}

TEST_CASE("generation is deterministic and validated", "[dgp]") {
    const GenConfig cfg{200, 100, 99};
    for (const auto k : kAllDgps) {
        const TimeSeries a = generate(k, cfg);
        const TimeSeries b = generate(k, cfg);
        CHECK(a.size() == 200);
        CHECK(a.values() == b.values());
    }
    CHECK(generate(DgpKind::AR, {200, 100, 1}).values() != generate(DgpKind::AR, {200, 100, 2}).values());
    CHECK_THROWS_AS(generate(DgpKind::AR, {2, 100, 1}), std::invalid_argument);
    CHECK_THROWS_AS(generate(DgpKind::AR, {10, -1, 1}), std::invalid_argument);
}

TEST_CASE("AR sample variance matches the Yule-Walker value", "[dgp][oracle]") {
    const auto gamma = oracle::ar_autocovariances({0.5, 0.45});
    const TimeSeries s = generate(DgpKind::AR, {100000, 100, 2024});
    CHECK(sample_variance(s.values()) == Approx(gamma[0]).epsilon(0.03));
    // Long-run mean is zero: 3 sigma band using the AR(2) long-run variance 1 / (1 - 0.95)^2.
    const double band = 3.0 * std::sqrt(1.0 / (0.05 * 0.05) / 100000.0);
    CHECK(std::abs(s.values().mean()) < band);
}

TEST_CASE("SAR marginals match the normal mixture", "[dgp][oracle]") {
    auto cdf = [](double x) { return 0.5 * oracle::normal_cdf(x - 1.0) + 0.5 * oracle::normal_cdf(x + 1.0); };
    for (const auto k : {DgpKind::SAR1, DgpKind::SAR2}) {
        const TimeSeries s = generate(k, {100000, 100, 7});
        const std::vector<double> v = s.to_vector();
        INFO(to_string(k));
        CHECK(oracle::ks_distance(v, cdf) < 0.02);
    }
}

TEST_CASE("jump overlay with vanishing size leaves the series unchanged", "[dgp]") {
    const TimeSeries s = generate(DgpKind::NAR1, {300, 100, 5});
    CHECK(jump_overlay(s, 300, 0.0, 11).values() == s.values());
    CHECK_THROWS_AS(jump_overlay(s, 300, -1.0, 11), std::invalid_argument);
}

TEST_CASE("jump count averages ten over the horizon", "[dgp][oracle]") {
    double total = 0.0;
    double p_end = 0.0;
    const int seeds = 10000;
    for (int i = 0; i < seeds; ++i) {
        total += static_cast<double>(jump_count(1000, 1000, {}, static_cast<std::uint64_t>(i)));
        p_end += jump_path(1000, 1000, {}, static_cast<std::uint64_t>(i))[999];
    }
    CHECK(total / seeds >= 9.5);
    CHECK(total / seeds <= 10.5);
    CHECK(std::abs(p_end / seeds) < 0.1);
}

TEST_CASE("jump path is a step function of cumulative jumps", "[dgp]") {
    const Eigen::VectorXd p = jump_path(500, 100, {}, 3);
    int changes = 0;
    for (Eigen::Index t = 1; t < p.size(); ++t) changes += p[t] != p[t - 1] ? 1 : 0;
    CHECK(changes <= static_cast<int>(jump_count(500, 100, {}, 3)));
    const TimeSeries s = generate(DgpKind::AR, {500, 100, 1});
    CHECK((jump_overlay(s, 100, 1.0, 3).values() - s.values()).isApprox(p));
}

TEST_CASE("per-step jump rule scales counts with n", "[dgp]") {
    double total = 0.0;
    const JumpSpec per_step{1.0, JumpRule::RatePerStep};
    for (int i = 0; i < 200; ++i) total += static_cast<double>(jump_count(100, 100, per_step, i));
    CHECK(total / 200 == Approx(1000.0).epsilon(0.02));
}

TEST_CASE("walk variance calibration", "[dgp]") {
    Eigen::VectorXd x(99);
    for (int i = 0; i < 99; ++i) x[i] = static_cast<double>(i);
    const double v = sample_variance(x);
    CHECK(calibrate_walk_variance(x, 4.0) == Approx(v / (4.0 * 50.0)).epsilon(1e-14));
    Eigen::VectorXd y = x * std::sqrt(2.0 / v);
    CHECK(sample_variance(y) == Approx(2.0));
    CHECK(calibrate_walk_variance(y, 4.0) == Approx(0.01).epsilon(1e-12));
    CHECK_THROWS_AS(calibrate_walk_variance(Eigen::VectorXd::Constant(10, 3.0), 4.0), std::invalid_argument);
    const TimeSeries s = generate(DgpKind::AR, {100, 100, 1});
    CHECK(random_walk_overlay(s, std::numeric_limits<double>::infinity(), 1).values() == s.values());
}

TEST_CASE("empirical SNR of the walk overlay is near four", "[dgp][oracle]") {
    const TimeSeries s = generate(DgpKind::TAR1, {200, 100, 17});
    const double sig = sample_variance(s.values());
    double walk_var = 0.0;
    const int draws = 1000;
    for (int i = 0; i < draws; ++i) {
        const Eigen::VectorXd w = random_walk_overlay(s, 4.0, static_cast<std::uint64_t>(i)).values() - s.values();
        walk_var += w.squaredNorm() / static_cast<double>(w.size());
    }
    walk_var /= draws;
    CHECK(sig / walk_var == Approx(4.0).epsilon(0.15));
}

TEST_CASE("both overlays add the walk and jump paths", "[dgp]") {
    const TimeSeries s = generate(DgpKind::BL2, {150, 100, 9});
    const std::uint64_t seed = 77;
    const TimeSeries both = apply_overlay(s, OverlaySpec::of(OverlayKind::Both), 150, seed);
    const TimeSeries walk_only = apply_overlay(s, OverlaySpec::of(OverlayKind::RandomWalk), 150, seed);
    const TimeSeries jump_only = apply_overlay(s, OverlaySpec::of(OverlayKind::Jump), 150, seed);
    const Eigen::VectorXd expected = s.values() + (walk_only.values() - s.values()) + (jump_only.values() - s.values());
    CHECK(both.values().isApprox(expected, 1e-12));
    CHECK(apply_overlay(s, OverlaySpec::of(OverlayKind::None), 150, seed).values() == s.values());
    CHECK(OverlaySpec::of(OverlayKind::Both).kind() == OverlayKind::Both);
}
