#pragma once

#include "tsbench/series.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tsbench::models {

/// Last observation carried forward.
double naive_forecast(const TimeSeries& s);

// ---------------------------------------------------------------------------
// Stationarity testing
// ---------------------------------------------------------------------------

/// 5% critical value of the KPSS level-stationarity test.
inline constexpr double kKpssCritical5 = 0.463;

/**
 * KPSS level-stationarity statistic with a Bartlett-kernel long-run variance.
 * `lags < 0` uses kpss_short_lags(n).
 */
double kpss_statistic(const Eigen::VectorXd& x, int lags = -1);

/// Default Bartlett truncation lag: floor(4 (n / 100)^(1/4)).
int kpss_short_lags(Eigen::Index n);

/// Smallest d <= max_d whose d-th difference passes KPSS at 5%; max_d otherwise.
int select_d(const TimeSeries& s, int max_d = 2);

/// Seasonal strength in [0, 1] from a classical additive decomposition with period m.
double seasonal_strength(const Eigen::VectorXd& x, int m);

/// 1 when seasonal_strength exceeds 0.64, else 0.
int select_seasonal_D(const Eigen::VectorXd& x, int m);

// ---------------------------------------------------------------------------
// ARIMA
// ---------------------------------------------------------------------------

struct SeasonalOrder {
    int P = 0;
    int D = 0;
    int Q = 0;
    int m = 1;

    friend bool operator==(const SeasonalOrder&, const SeasonalOrder&) = default;
};

struct ArimaOrder {
    int p = 0;
    int d = 0;
    int q = 0;
    std::optional<SeasonalOrder> seasonal;

    void validate() const;
    std::string to_string() const;
    int num_coefficients() const;
    /// Seasonal part present and non-trivial.
    bool has_seasonal_terms() const;

    friend bool operator==(const ArimaOrder&, const ArimaOrder&) = default;
};

struct ArimaSearchBounds {
    int max_p = 5;
    int max_q = 5;
    int max_d = 2;
    int max_P = 2;
    int max_Q = 2;
    int max_D = 1;
    int max_steps = 94;
};

struct VisitedOrder {
    ArimaOrder order;
    double aicc = 0.0;
};

class ArimaModel {
public:
    ArimaModel() = default;

    /**
     * Builds a model from known coefficients and runs it over `history` to
     * set up the forecasting state. `phi`/`theta` are non-seasonal; the
     * seasonal vectors may be empty.
     */
    static ArimaModel from_coefficients(const ArimaOrder& order, std::vector<double> phi, std::vector<double> theta,
                                        double intercept, const Eigen::VectorXd& history,
                                        std::vector<double> seasonal_phi = {},
                                        std::vector<double> seasonal_theta = {});

    bool fitted() const noexcept { return fitted_; }
    const ArimaOrder& order() const noexcept { return order_; }
    const std::vector<double>& ar() const noexcept { return phi_; }
    const std::vector<double>& ma() const noexcept { return theta_; }
    const std::vector<double>& seasonal_ar() const noexcept { return sphi_; }
    const std::vector<double>& seasonal_ma() const noexcept { return stheta_; }
    double intercept() const noexcept { return intercept_; }
    bool has_intercept() const noexcept { return has_intercept_; }
    double sigma2() const noexcept { return sigma2_; }
    double css() const noexcept { return css_; }
    double aicc() const noexcept { return aicc_; }
    Eigen::Index effective_n() const noexcept { return n_eff_; }

    /// True when the fit fell back to ARIMA(0, d, 0).
    bool used_fallback() const noexcept { return fallback_; }
    const std::string& fallback_reason() const noexcept { return fallback_reason_; }

    /// Every order evaluated during automatic selection, in visiting order.
    const std::vector<VisitedOrder>& search_path() const noexcept { return visited_; }

    /// Conditional mean of the next observation. Throws std::logic_error if unfitted.
    double forecast_one() const;

    /// AR roots (non-seasonal and seasonal polynomials) all lie outside the unit circle.
    bool is_stationary() const;

private:
    friend ArimaModel fit_arima_order(const TimeSeries&, const ArimaOrder&, bool, Eigen::Index);
    friend ArimaModel fit_arima(const TimeSeries&, const ArimaSearchBounds&);
    friend ArimaModel fit_sarima(const TimeSeries&, int, const ArimaSearchBounds&);
    friend ArimaModel arima_fallback(const TimeSeries&, int, std::string);

    void set_state(const Eigen::VectorXd& x, Eigen::Index score_from = 0);

    bool fitted_ = false;
    ArimaOrder order_;
    std::vector<double> phi_, theta_, sphi_, stheta_;
    double intercept_ = 0.0;
    bool has_intercept_ = false;
    double sigma2_ = 0.0;
    double css_ = 0.0;
    double aicc_ = 0.0;
    Eigen::Index n_eff_ = 0;
    bool fallback_ = false;
    std::string fallback_reason_;
    std::vector<VisitedOrder> visited_;

    // Forecast state: most recent values last.
    Eigen::VectorXd x_tail_;  // original scale, length = differencing degree
    Eigen::VectorXd y_tail_;  // differenced scale, length = expanded AR degree
    Eigen::VectorXd e_tail_;  // residuals, length = expanded MA degree
};

/// Coefficients of (1-B)^d (1-B^m)^D, constant term first.
std::vector<double> differencing_polynomial(int d, int D, int m);

/// Whether 1 - sum coeffs_i z^i has all roots outside the unit circle (step-down test).
bool ar_polynomial_stationary(const std::vector<double>& coeffs);

/// CSS fit of a fixed order. Intercept included when requested (on the differenced scale).
/// Residuals before index score_from of the differenced series are left out of the CSS and AICc.
ArimaModel fit_arima_order(const TimeSeries& s, const ArimaOrder& order, bool include_intercept,
                           Eigen::Index score_from = 0);

/// ARIMA(0, d, 0) with the mean of the differenced series as drift.
ArimaModel arima_fallback(const TimeSeries& s, int d, std::string reason);

/**
 * Automatic ARIMA: d from KPSS, then stepwise (p, q) search by AICc from
 * {(0,0), (1,0), (0,1), (2,2)}, moving to the best +-1 neighbour while it improves.
 */
ArimaModel fit_arima(const TimeSeries& s, const ArimaSearchBounds& bounds = {});

/**
 * Seasonal automatic ARIMA with period m. m <= 1, or a search ending with no
 * seasonal terms, returns exactly fit_arima(s, bounds).
 */
ArimaModel fit_sarima(const TimeSeries& s, int m, const ArimaSearchBounds& bounds = {});

inline double forecast_one(const ArimaModel& model) { return model.forecast_one(); }

}  // namespace tsbench::models
