#pragma once

#include "tsbench/series.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace tsbench::dgp {

/// The twelve nonlinear/linear generating processes of the benchmark.
enum class DgpKind { AR, BL1, BL2, NAR1, NAR2, NMA, SAR1, SAR2, STAR1, STAR2, TAR1, TAR2 };

inline constexpr std::array<DgpKind, 12> kAllDgps = {
    DgpKind::AR,   DgpKind::BL1,  DgpKind::BL2,   DgpKind::NAR1,  DgpKind::NAR2, DgpKind::NMA,
    DgpKind::SAR1, DgpKind::SAR2, DgpKind::STAR1, DgpKind::STAR2, DgpKind::TAR1, DgpKind::TAR2,
};

std::string_view to_string(DgpKind kind) noexcept;
std::optional<DgpKind> parse_dgp(std::string_view name) noexcept;

struct GenConfig {
    Eigen::Index n = 100;
    Eigen::Index burn_in = 100;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Lagged values feeding one step of a recursion: x_{t-1}, x_{t-2}, eps_{t-1}, eps_{t-2}.
struct RecursionState {
    double x1 = 0.0;
    double x2 = 0.0;
    double e1 = 0.0;
    double e2 = 0.0;
};

/// One step of the recursion for `kind` given the lag state and the fresh innovation.
double step(DgpKind kind, const RecursionState& lags, double eps) noexcept;

/**
 * Runs the recursion once per innovation, starting from `initial`.
 * Returns one value per innovation. This is the deterministic core of
 * `generate` and lets callers inject their own noise (e.g. all zeros).
 */
Eigen::VectorXd iterate(DgpKind kind, const Eigen::VectorXd& innovations, RecursionState initial = {});

/// burn_in + n steps from zero state with N(0,1) innovations; the burn-in prefix is dropped.
TimeSeries generate(DgpKind kind, const GenConfig& cfg);

// ---------------------------------------------------------------------------
// Complexity overlays
// ---------------------------------------------------------------------------

/// How the Poisson intensity is tied to the series length n.
enum class JumpRule {
    ExpectedTenJumps,  ///< per-step mean 10/n: one jump every n/10 steps on average
    RatePerStep,       ///< per-step mean n/10 (literal Poisson(lambda) reading)
};

struct JumpSpec {
    double sigma_p_sq = 1.0;
    JumpRule rule = JumpRule::ExpectedTenJumps;
};

struct RandomWalkSpec {
    double snr_target = 4.0;
};

enum class OverlayKind { None, Jump, RandomWalk, Both };

inline constexpr std::array<OverlayKind, 4> kAllOverlays = {OverlayKind::None, OverlayKind::Jump,
                                                            OverlayKind::RandomWalk, OverlayKind::Both};

std::string_view to_string(OverlayKind kind) noexcept;
std::optional<OverlayKind> parse_overlay(std::string_view name) noexcept;

struct OverlaySpec {
    std::optional<JumpSpec> jump;
    std::optional<RandomWalkSpec> random_walk;

    static OverlaySpec of(OverlayKind kind, JumpSpec jump = {}, RandomWalkSpec walk = {});
    OverlayKind kind() const noexcept;
};

/// Compound Poisson path p_1..p_len with per-step jump counts drawn for horizon n.
Eigen::VectorXd jump_path(Eigen::Index len, Eigen::Index n, const JumpSpec& spec, std::uint64_t seed);

/// Number of jumps a path with the given arguments contains (same stream as jump_path).
std::uint64_t jump_count(Eigen::Index len, Eigen::Index n, const JumpSpec& spec, std::uint64_t seed);

/// x_t + p_t.
TimeSeries jump_overlay(const TimeSeries& s, Eigen::Index n, double sigma_p_sq, std::uint64_t seed,
                        JumpRule rule = JumpRule::ExpectedTenJumps);

/**
 * Innovation variance of the walk so that var(signal) / (sigma^2 (n+1)/2) equals snr_target.
 * Throws std::invalid_argument on a constant signal.
 */
double calibrate_walk_variance(const Eigen::VectorXd& signal, double snr_target);

/// Walk w_1..w_len with w_0 = 0 and N(0, variance) steps.
Eigen::VectorXd walk_path(Eigen::Index len, double variance, std::uint64_t seed);

/// x_t + w_t with the walk variance calibrated to snr_target.
TimeSeries random_walk_overlay(const TimeSeries& s, double snr_target, std::uint64_t seed);

/// Random walk first (calibrated on the clean signal), then jumps.
TimeSeries apply_overlay(const TimeSeries& s, const OverlaySpec& spec, Eigen::Index n, std::uint64_t seed);

}  // namespace tsbench::dgp
