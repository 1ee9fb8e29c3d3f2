#include "tsbench/dgp.hpp"

#include "tsbench/random.hpp"

#include <cmath>
#include <stdexcept>

namespace tsbench::dgp {

namespace {

constexpr std::array<std::string_view, 12> kDgpNames = {"AR",   "BL1",  "BL2",   "NAR1",  "NAR2", "NMA",
                                                        "SAR1", "SAR2", "STAR1", "STAR2", "TAR1", "TAR2"};
constexpr std::array<std::string_view, 4> kOverlayNames = {"none", "jump", "random_walk", "both"};

double sign(double v) noexcept { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// 1 / (1 + exp(-10 x)) without overflow warnings for large |x|.
double transition(double x) noexcept {
    const double z = -10.0 * x;
    if (z > 700.0) {
        return 0.0;
    }
    return 1.0 / (1.0 + std::exp(z));
}

std::uint64_t stream_seed(std::uint64_t seed, std::string_view tag) { return derive_seed(seed, tag, 0); }

}  // namespace

std::string_view to_string(DgpKind kind) noexcept { return kDgpNames[static_cast<std::size_t>(kind)]; }

std::optional<DgpKind> parse_dgp(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kDgpNames.size(); ++i) {
        if (kDgpNames[i] == name) {
            return static_cast<DgpKind>(i);
        }
    }
    return std::nullopt;
}

std::string_view to_string(OverlayKind kind) noexcept { return kOverlayNames[static_cast<std::size_t>(kind)]; }

std::optional<OverlayKind> parse_overlay(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kOverlayNames.size(); ++i) {
        if (kOverlayNames[i] == name) {
            return static_cast<OverlayKind>(i);
        }
    }
    return std::nullopt;
}

void GenConfig::validate() const {
    if (n < 3) {
        throw std::invalid_argument("GenConfig: n must be >= 3");
    }
    if (burn_in < 0) {
        throw std::invalid_argument("GenConfig: burn_in must be >= 0");
    }
}

double step(DgpKind kind, const RecursionState& l, double eps) noexcept {
    switch (kind) {
        case DgpKind::AR:
            return 0.5 * l.x1 + 0.45 * l.x2 + eps;
        case DgpKind::BL1:
            return 0.7 * l.x1 * l.e2 + eps;
        case DgpKind::BL2:
            return 0.4 * l.x1 - 0.3 * l.x2 + 0.5 * l.x2 * l.e1 + eps;
        case DgpKind::NAR1:
            return 0.7 * std::abs(l.x1) / (std::abs(l.x1) + 2.0) + eps;
        case DgpKind::NAR2:
            return 0.7 * std::abs(l.x1) / (std::abs(l.x1) + 2.0) + 0.35 * std::abs(l.x2) / (std::abs(l.x2) + 2.0) +
                   eps;
        case DgpKind::NMA:
            return eps - 0.3 * l.e1 + 0.2 * l.e2 + 0.4 * l.e1 * l.e2 - 0.25 * l.e2 * l.e2;
        case DgpKind::SAR1:
            return sign(l.x1) + eps;
        case DgpKind::SAR2:
            return sign(l.x1 + l.x2) + eps;
        case DgpKind::STAR1:
            // Both innovation terms kept as written: 0.8 eps_t ... + eps_t.
            return 0.8 * eps - 0.8 * l.e1 * transition(l.x1) + eps;
        case DgpKind::STAR2:
            // Leading term taken as 0.3 x_{t-1}.
            return 0.3 * l.x1 + 0.6 * l.x2 + (0.1 - 0.9 * l.x1 + 0.8 * l.x2) * transition(l.x1) + eps;
        case DgpKind::TAR1:
            return std::abs(l.x1) <= 1.0 ? 0.9 * l.x1 + eps : -0.3 * l.x1 - eps;
        case DgpKind::TAR2:
            return std::abs(l.x1) <= 1.0 ? 0.9 * l.x1 + 0.05 * l.x2 + eps : -0.3 * l.x1 + 0.65 * l.x2 - eps;
    }
    return 0.0;
}

Eigen::VectorXd iterate(DgpKind kind, const Eigen::VectorXd& innovations, RecursionState state) {
    Eigen::VectorXd out(innovations.size());
    for (Eigen::Index t = 0; t < innovations.size(); ++t) {
        const double eps = innovations[t];
        const double x = step(kind, state, eps);
        out[t] = x;
        state = {x, state.x1, eps, state.e1};
    }
    return out;
}

TimeSeries generate(DgpKind kind, const GenConfig& cfg) {
    cfg.validate();
    Rng rng(stream_seed(cfg.seed, "dgp-innovations"));
    Eigen::VectorXd eps(cfg.burn_in + cfg.n);
    for (Eigen::Index i = 0; i < eps.size(); ++i) {
        eps[i] = rng.normal();
    }
    Eigen::VectorXd path = iterate(kind, eps);
    if (!path.allFinite()) {
        throw std::runtime_error("generate: " + std::string(to_string(kind)) + " diverged");
    }
    std::string origin = std::string(to_string(kind)) + "|n=" + std::to_string(cfg.n) +
                         "|seed=" + std::to_string(cfg.seed);
    return {path.tail(cfg.n), std::move(origin)};
}

OverlaySpec OverlaySpec::of(OverlayKind kind, JumpSpec jump, RandomWalkSpec walk) {
    OverlaySpec spec;
    if (kind == OverlayKind::Jump || kind == OverlayKind::Both) {
        spec.jump = jump;
    }
    if (kind == OverlayKind::RandomWalk || kind == OverlayKind::Both) {
        spec.random_walk = walk;
    }
    return spec;
}

OverlayKind OverlaySpec::kind() const noexcept {
    if (jump && random_walk) {
        return OverlayKind::Both;
    }
    if (jump) {
        return OverlayKind::Jump;
    }
    if (random_walk) {
        return OverlayKind::RandomWalk;
    }
    return OverlayKind::None;
}

namespace {

double per_step_jump_mean(Eigen::Index n, JumpRule rule) {
    const double horizon = static_cast<double>(n);
    return rule == JumpRule::ExpectedTenJumps ? 10.0 / horizon : horizon / 10.0;
}

template <typename OnJump>
void draw_jumps(Eigen::Index len, Eigen::Index n, const JumpSpec& spec, std::uint64_t seed, OnJump&& on_jump) {
    if (n < 1) {
        throw std::invalid_argument("jump overlay: horizon n must be >= 1");
    }
    if (!(spec.sigma_p_sq >= 0.0)) {
        throw std::invalid_argument("jump overlay: sigma_p_sq must be >= 0");
    }
    Rng counts(stream_seed(seed, "jump-counts"));
    Rng sizes(stream_seed(seed, "jump-sizes"));
    const double mean = per_step_jump_mean(n, spec.rule);
    const double sd = std::sqrt(spec.sigma_p_sq);
    for (Eigen::Index t = 0; t < len; ++t) {
        const std::uint64_t k = counts.poisson(mean);
        for (std::uint64_t j = 0; j < k; ++j) {
            on_jump(t, sd * sizes.normal());
        }
    }
}

}  // namespace

Eigen::VectorXd jump_path(Eigen::Index len, Eigen::Index n, const JumpSpec& spec, std::uint64_t seed) {
    Eigen::VectorXd increments = Eigen::VectorXd::Zero(len);
    draw_jumps(len, n, spec, seed, [&](Eigen::Index t, double z) { increments[t] += z; });
    Eigen::VectorXd path(len);
    double level = 0.0;
    for (Eigen::Index t = 0; t < len; ++t) {
        level += increments[t];
        path[t] = level;
    }
    return path;
}

std::uint64_t jump_count(Eigen::Index len, Eigen::Index n, const JumpSpec& spec, std::uint64_t seed) {
    std::uint64_t count = 0;
    draw_jumps(len, n, spec, seed, [&](Eigen::Index, double) { ++count; });
    return count;
}

TimeSeries jump_overlay(const TimeSeries& s, Eigen::Index n, double sigma_p_sq, std::uint64_t seed, JumpRule rule) {
    const JumpSpec spec{sigma_p_sq, rule};
    Eigen::VectorXd out = s.values() + jump_path(s.size(), n, spec, seed);
    return {std::move(out), s.origin() + "|jump"};
}

double calibrate_walk_variance(const Eigen::VectorXd& signal, double snr_target) {
    if (!(snr_target > 0.0)) {
        throw std::invalid_argument("random walk overlay: snr_target must be > 0");
    }
    const double var = sample_variance(signal);
    if (!(var > 0.0)) {
        throw std::invalid_argument("random walk overlay: signal has zero variance, SNR undefined");
    }
    const double n = static_cast<double>(signal.size());
    return var / (snr_target * (n + 1.0) / 2.0);
}

Eigen::VectorXd walk_path(Eigen::Index len, double variance, std::uint64_t seed) {
    Rng rng(stream_seed(seed, "walk-steps"));
    const double sd = std::sqrt(variance);
    Eigen::VectorXd path(len);
    double w = 0.0;
    for (Eigen::Index t = 0; t < len; ++t) {
        w += sd * rng.normal();
        path[t] = w;
    }
    return path;
}

TimeSeries random_walk_overlay(const TimeSeries& s, double snr_target, std::uint64_t seed) {
    if (std::isinf(snr_target)) {
        return {s.values(), s.origin() + "|walk"};
    }
    const double variance = calibrate_walk_variance(s.values(), snr_target);
    Eigen::VectorXd out = s.values() + walk_path(s.size(), variance, seed);
    return {std::move(out), s.origin() + "|walk"};
}

TimeSeries apply_overlay(const TimeSeries& s, const OverlaySpec& spec, Eigen::Index n, std::uint64_t seed) {
    TimeSeries out = s;
    if (spec.random_walk) {
        out = random_walk_overlay(out, spec.random_walk->snr_target, seed);
    }
    if (spec.jump) {
        out = jump_overlay(out, n, spec.jump->sigma_p_sq, seed, spec.jump->rule);
    }
    return out;
}

}  // namespace tsbench::dgp
