#pragma once

#include "tsbench/series.hpp"

#include <vector>

namespace tsbench::models {

/// Box-Cox transform; lambda = 1 is treated as the identity.
Eigen::VectorXd box_cox(const Eigen::VectorXd& x, double lambda);
double box_cox(double x, double lambda);
double inv_box_cox(double z, double lambda);
Eigen::VectorXd inv_box_cox(const Eigen::VectorXd& z, double lambda);

struct TbatsOptions {
    std::vector<double> lambda_grid{0.0, 0.25, 0.5, 0.75, 1.0};
    int max_p = 2;
    int max_q = 2;
    int period = 0;     ///< 0 disables the trigonometric seasonal block
    int harmonics = 1;  ///< k, used when period >= 2
};

/**
 * Damped-trend exponential smoothing on a Box-Cox scale with ARMA errors and an
 * optional trigonometric seasonal block:
 *
 *   y_t = l_{t-1} + phi b_{t-1} + sum_j s_{j,t-1} + d_t
 *   d_t = sum a_i d_{t-i} + sum c_j e_{t-j} + e_t
 *   l_t = l_{t-1} + phi b_{t-1} + alpha d_t
 *   b_t = phi b_{t-1} + beta d_t
 */
class TbatsLiteModel {
public:
    TbatsLiteModel() = default;

    bool fitted() const noexcept { return fitted_; }
    double lambda() const noexcept { return lambda_; }
    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }
    double damping() const noexcept { return phi_; }
    bool has_trend() const noexcept { return trend_; }
    const std::vector<double>& ar() const noexcept { return ar_; }
    const std::vector<double>& ma() const noexcept { return ma_; }
    int period() const noexcept { return period_; }
    int harmonics() const noexcept { return harmonics_; }
    double level() const noexcept { return level_; }
    double trend() const noexcept { return slope_; }
    double aic() const noexcept { return aic_; }
    double sse() const noexcept { return sse_; }
    /// True when every candidate failed and simple exponential smoothing was used.
    bool used_fallback() const noexcept { return fallback_; }

    /// One-step forecast on the original scale. Throws std::logic_error if unfitted.
    double forecast_one() const;

private:
    friend struct TbatsFitter;

    bool fitted_ = false;
    double lambda_ = 1.0;
    double alpha_ = 0.0;
    double beta_ = 0.0;
    double phi_ = 1.0;
    bool trend_ = true;
    std::vector<double> ar_, ma_;
    int period_ = 0;
    int harmonics_ = 0;
    double gamma1_ = 0.0;
    double gamma2_ = 0.0;
    double aic_ = 0.0;
    double sse_ = 0.0;
    bool fallback_ = false;

    // Final filter state.
    double level_ = 0.0;
    double slope_ = 0.0;
    std::vector<double> season_, season_star_;
    std::vector<double> d_tail_, e_tail_;  // most recent first
};

TbatsLiteModel fit_tbats_lite(const TimeSeries& s, const TbatsOptions& options = {});

inline double forecast_one(const TbatsLiteModel& model) { return model.forecast_one(); }

}  // namespace tsbench::models
