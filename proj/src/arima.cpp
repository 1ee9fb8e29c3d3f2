#include "tsbench/arima.hpp"

#include "tsbench/optimize.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <tuple>

namespace tsbench::models {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd demeaned(const Eigen::VectorXd& x) { return x.array() - x.mean(); }

double autocov(const Eigen::VectorXd& e, Eigen::Index lag) {
    const Eigen::Index n = e.size();
    return e.tail(n - lag).dot(e.head(n - lag)) / static_cast<double>(n);
}

}  // namespace

double naive_forecast(const TimeSeries& s) { return s.back(); }

// ---------------------------------------------------------------------------
// KPSS
// ---------------------------------------------------------------------------

int kpss_short_lags(Eigen::Index n) {
    return static_cast<int>(std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
}

double kpss_statistic(const Eigen::VectorXd& x, int lags) {
    const Eigen::Index n = x.size();
    if (n < 2) {
        throw std::invalid_argument("kpss_statistic: need at least two observations");
    }
    const Eigen::VectorXd e = demeaned(x);
    double eta = 0.0;
    double partial = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) {
        partial += e[t];
        eta += partial * partial;
    }
    const double nn = static_cast<double>(n);
    eta /= nn * nn;

    const int l = std::min<int>(lags < 0 ? kpss_short_lags(n) : lags, static_cast<int>(n - 1));
    double lrv = autocov(e, 0);
    for (int s = 1; s <= l; ++s) {
        const double w = 1.0 - static_cast<double>(s) / (static_cast<double>(l) + 1.0);
        lrv += 2.0 * w * autocov(e, s);
    }
    if (!(lrv > 0.0)) {
        return 0.0;  // constant series
    }
    return eta / lrv;
}

int select_d(const TimeSeries& s, int max_d) {
    if (s.size() < 20) {
        throw std::invalid_argument("select_d: series must have at least 20 observations");
    }
    if (max_d < 0) {
        throw std::invalid_argument("select_d: max_d must be >= 0");
    }
    for (int d = 0; d <= max_d; ++d) {
        const Eigen::VectorXd y = d == 0 ? s.values() : difference(s.values(), d);
        if (kpss_statistic(y) < kKpssCritical5) {
            return d;
        }
    }
    return max_d;
}

double seasonal_strength(const Eigen::VectorXd& x, int m) {
    const Eigen::Index n = x.size();
    if (m < 2 || n < 2 * static_cast<Eigen::Index>(m) + 1) {
        return 0.0;
    }
    const Eigen::Index half = m / 2;
    Eigen::VectorXd trend = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
    for (Eigen::Index t = half; t + half < n; ++t) {
        double sum = 0.0;
        if (m % 2 == 1) {
            sum = x.segment(t - half, m).sum() / m;
        } else {
            // 2 x m centred moving average
            sum = (0.5 * x[t - half] + x.segment(t - half + 1, m - 1).sum() + 0.5 * x[t + half]) / m;
        }
        trend[t] = sum;
    }
    Eigen::VectorXd phase_sum = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd phase_cnt = Eigen::VectorXd::Zero(m);
    for (Eigen::Index t = half; t + half < n; ++t) {
        phase_sum[t % m] += x[t] - trend[t];
        phase_cnt[t % m] += 1.0;
    }
    Eigen::VectorXd index = phase_sum.cwiseQuotient(phase_cnt.cwiseMax(1.0));
    index.array() -= index.mean();

    std::vector<double> detr;
    std::vector<double> rem;
    for (Eigen::Index t = half; t + half < n; ++t) {
        const double d = x[t] - trend[t];
        detr.push_back(d);
        rem.push_back(d - index[t % m]);
    }
    if (detr.size() < 2) {
        return 0.0;
    }
    const double var_detr = sample_variance(as_eigen(detr));
    if (!(var_detr > 0.0)) {
        return 0.0;
    }
    return std::max(0.0, 1.0 - sample_variance(as_eigen(rem)) / var_detr);
}

int select_seasonal_D(const Eigen::VectorXd& x, int m) { return seasonal_strength(x, m) > 0.64 ? 1 : 0; }

// ---------------------------------------------------------------------------
// Polynomials
// ---------------------------------------------------------------------------

std::vector<double> differencing_polynomial(int d, int D, int m) {
    std::vector<double> poly{1.0};
    auto multiply = [&](int lag) {
        std::vector<double> next(poly.size() + static_cast<std::size_t>(lag), 0.0);
        for (std::size_t i = 0; i < poly.size(); ++i) {
            next[i] += poly[i];
            next[i + static_cast<std::size_t>(lag)] -= poly[i];
        }
        poly = std::move(next);
    };
    for (int i = 0; i < d; ++i) {
        multiply(1);
    }
    for (int i = 0; i < D; ++i) {
        multiply(m);
    }
    return poly;
}

bool ar_polynomial_stationary(const std::vector<double>& coeffs) {
    std::vector<double> a = coeffs;
    while (!a.empty() && a.back() == 0.0) {
        a.pop_back();
    }
    for (std::size_t k = a.size(); k >= 1; --k) {
        const double kappa = a[k - 1];
        if (!std::isfinite(kappa) || std::abs(kappa) >= 1.0) {
            return false;
        }
        const double denom = 1.0 - kappa * kappa;
        std::vector<double> lower(k - 1);
        for (std::size_t j = 1; j < k; ++j) {
            lower[j - 1] = (a[j - 1] + kappa * a[k - j - 1]) / denom;
        }
        a = std::move(lower);
    }
    return true;
}

namespace {

// Coefficients a_1..a_K of the product (1 - sum phi_i B^i)(1 - sum Phi_j B^{jm}) written as 1 - sum a_k B^k.
std::vector<double> expand_ar(const std::vector<double>& phi, const std::vector<double>& sphi, int m) {
    const std::size_t deg = phi.size() + sphi.size() * static_cast<std::size_t>(m);
    std::vector<double> poly(deg + 1, 0.0);
    std::vector<double> left(phi.size() + 1, 0.0);
    left[0] = 1.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        left[i + 1] = -phi[i];
    }
    std::vector<double> right(sphi.size() * static_cast<std::size_t>(m) + 1, 0.0);
    right[0] = 1.0;
    for (std::size_t j = 0; j < sphi.size(); ++j) {
        right[(j + 1) * static_cast<std::size_t>(m)] = -sphi[j];
    }
    for (std::size_t i = 0; i < left.size(); ++i) {
        for (std::size_t j = 0; j < right.size(); ++j) {
            poly[i + j] += left[i] * right[j];
        }
    }
    std::vector<double> a(deg);
    for (std::size_t k = 1; k <= deg; ++k) {
        a[k - 1] = -poly[k];
    }
    return a;
}

// Coefficients b_1..b_K of (1 + sum theta_i B^i)(1 + sum Theta_j B^{jm}).
std::vector<double> expand_ma(const std::vector<double>& theta, const std::vector<double>& stheta, int m) {
    std::vector<double> neg_t(theta.size()), neg_s(stheta.size());
    std::transform(theta.begin(), theta.end(), neg_t.begin(), [](double v) { return -v; });
    std::transform(stheta.begin(), stheta.end(), neg_s.begin(), [](double v) { return -v; });
    std::vector<double> b = expand_ar(neg_t, neg_s, m);
    std::transform(b.begin(), b.end(), b.begin(), [](double v) { return -v; });
    return b;
}

bool invertible(const std::vector<double>& theta) {
    std::vector<double> neg(theta.size());
    std::transform(theta.begin(), theta.end(), neg.begin(), [](double v) { return -v; });
    return ar_polynomial_stationary(neg);
}

Eigen::VectorXd apply_differencing(const Eigen::VectorXd& x, const std::vector<double>& poly) {
    const auto deg = static_cast<Eigen::Index>(poly.size() - 1);
    if (x.size() <= deg) {
        throw std::invalid_argument("ARIMA: series too short for the differencing order");
    }
    Eigen::VectorXd y(x.size() - deg);
    for (Eigen::Index t = deg; t < x.size(); ++t) {
        double v = 0.0;
        for (Eigen::Index k = 0; k <= deg; ++k) {
            v += poly[static_cast<std::size_t>(k)] * x[t - k];
        }
        y[t - deg] = v;
    }
    return y;
}

// Conditional residuals; the first `cond` residuals are fixed at zero. Only
// residuals from index score_from on enter the sum.
double css_residuals(const Eigen::VectorXd& y, double mu, const std::vector<double>& a, const std::vector<double>& b,
                     Eigen::VectorXd& e, Eigen::Index score_from = 0) {
    const Eigen::Index n = y.size();
    const auto cond = static_cast<Eigen::Index>(a.size());
    e.setZero(n);
    double css = 0.0;
    for (Eigen::Index t = cond; t < n; ++t) {
        double pred = mu;
        for (std::size_t k = 0; k < a.size(); ++k) {
            pred += a[k] * (y[t - 1 - static_cast<Eigen::Index>(k)] - mu);
        }
        for (std::size_t k = 0; k < b.size(); ++k) {
            const Eigen::Index idx = t - 1 - static_cast<Eigen::Index>(k);
            if (idx >= 0) {
                pred += b[k] * e[idx];
            }
        }
        const double r = y[t] - pred;
        e[t] = r;
        if (t >= score_from) {
            css += r * r;
        }
        if (!(css < 1e300)) {
            return kInf;
        }
    }
    return css;
}

struct Params {
    std::vector<double> phi, theta, sphi, stheta;
    double delta = 0.0;
};

Params unpack(const Eigen::VectorXd& v, const ArimaOrder& o, bool intercept) {
    Params p;
    const int P = o.seasonal ? o.seasonal->P : 0;
    const int Q = o.seasonal ? o.seasonal->Q : 0;
    Eigen::Index i = 0;
    for (int k = 0; k < o.p; ++k) p.phi.push_back(v[i++]);
    for (int k = 0; k < o.q; ++k) p.theta.push_back(v[i++]);
    for (int k = 0; k < P; ++k) p.sphi.push_back(v[i++]);
    for (int k = 0; k < Q; ++k) p.stheta.push_back(v[i++]);
    if (intercept) p.delta = v[i++];
    return p;
}

int period_of(const ArimaOrder& o) { return o.seasonal ? o.seasonal->m : 1; }

// Largest modulus among inverse roots of 1 - sum c_i z^i.
double max_inverse_root(const std::vector<double>& coeffs) {
    const auto k = static_cast<Eigen::Index>(coeffs.size());
    if (k == 0) {
        return 0.0;
    }
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        companion(0, i) = coeffs[static_cast<std::size_t>(i)];
    }
    if (k > 1) {
        companion.bottomLeftCorner(k - 1, k - 1).setIdentity();
    }
    return companion.eigenvalues().array().abs().maxCoeff();
}

// Roots closer to the unit circle than 1.01 make the search skip the order.
bool near_unit_root(const ArimaModel& model) {
    const int m = model.order().seasonal ? model.order().seasonal->m : 1;
    std::vector<double> ma = expand_ma(model.ma(), model.seasonal_ma(), m);
    std::transform(ma.begin(), ma.end(), ma.begin(), [](double v) { return -v; });
    const double limit = 1.0 / 1.01;
    return max_inverse_root(expand_ar(model.ar(), model.seasonal_ar(), m)) > limit || max_inverse_root(ma) > limit;
}

double aicc_from(double css, Eigen::Index n_eff, int k) {
    const double n = static_cast<double>(n_eff);
    const double sigma2 = std::max(css / n, 1e-300);
    const double loglik = -0.5 * n * (std::log(2.0 * std::numbers::pi * sigma2) + 1.0);
    const double kk = static_cast<double>(k);
    if (n - kk - 1.0 <= 0.0) {
        return kInf;
    }
    return -2.0 * loglik + 2.0 * kk + 2.0 * kk * (kk + 1.0) / (n - kk - 1.0);
}

}  // namespace

// ---------------------------------------------------------------------------
// ArimaOrder / ArimaModel
// ---------------------------------------------------------------------------

void ArimaOrder::validate() const {
    if (p < 0 || d < 0 || q < 0) {
        throw std::invalid_argument("ArimaOrder: p, d, q must be non-negative");
    }
    if (seasonal) {
        if (seasonal->P < 0 || seasonal->D < 0 || seasonal->Q < 0) {
            throw std::invalid_argument("ArimaOrder: P, D, Q must be non-negative");
        }
        if (seasonal->m < 2) {
            throw std::invalid_argument("ArimaOrder: seasonal period must be >= 2");
        }
    }
}

std::string ArimaOrder::to_string() const {
    std::string s = "ARIMA(" + std::to_string(p) + "," + std::to_string(d) + "," + std::to_string(q) + ")";
    if (seasonal) {
        s += "(" + std::to_string(seasonal->P) + "," + std::to_string(seasonal->D) + "," +
             std::to_string(seasonal->Q) + ")[" + std::to_string(seasonal->m) + "]";
    }
    return s;
}

int ArimaOrder::num_coefficients() const {
    return p + q + (seasonal ? seasonal->P + seasonal->Q : 0);
}

bool ArimaOrder::has_seasonal_terms() const {
    return seasonal && (seasonal->P > 0 || seasonal->Q > 0 || seasonal->D > 0);
}

void ArimaModel::set_state(const Eigen::VectorXd& x, Eigen::Index score_from) {
    const int m = period_of(order_);
    const int D = order_.seasonal ? order_.seasonal->D : 0;
    const auto poly = differencing_polynomial(order_.d, D, m);
    const Eigen::VectorXd y = apply_differencing(x, poly);
    const auto a = expand_ar(phi_, sphi_, m);
    const auto b = expand_ma(theta_, stheta_, m);
    if (y.size() <= static_cast<Eigen::Index>(a.size())) {
        throw std::invalid_argument("ARIMA: history too short for the AR order");
    }
    Eigen::VectorXd e;
    css_ = css_residuals(y, intercept_, a, b, e, score_from);
    n_eff_ = y.size() - std::max(static_cast<Eigen::Index>(a.size()), score_from);
    const auto deg = static_cast<Eigen::Index>(poly.size() - 1);
    x_tail_ = x.tail(deg);
    y_tail_ = y.tail(static_cast<Eigen::Index>(a.size()));
    e_tail_ = e.tail(std::min<Eigen::Index>(static_cast<Eigen::Index>(b.size()), e.size()));
    fitted_ = true;
}

ArimaModel ArimaModel::from_coefficients(const ArimaOrder& order, std::vector<double> phi, std::vector<double> theta,
                                         double intercept, const Eigen::VectorXd& history,
                                         std::vector<double> seasonal_phi, std::vector<double> seasonal_theta) {
    order.validate();
    const int P = order.seasonal ? order.seasonal->P : 0;
    const int Q = order.seasonal ? order.seasonal->Q : 0;
    if (static_cast<int>(phi.size()) != order.p || static_cast<int>(theta.size()) != order.q ||
        static_cast<int>(seasonal_phi.size()) != P || static_cast<int>(seasonal_theta.size()) != Q) {
        throw std::invalid_argument("ArimaModel::from_coefficients: coefficient counts do not match the order");
    }
    ArimaModel model;
    model.order_ = order;
    model.phi_ = std::move(phi);
    model.theta_ = std::move(theta);
    model.sphi_ = std::move(seasonal_phi);
    model.stheta_ = std::move(seasonal_theta);
    model.intercept_ = intercept;
    model.has_intercept_ = intercept != 0.0;
    model.set_state(history);
    model.sigma2_ = model.n_eff_ > 0 ? std::max(model.css_ / static_cast<double>(model.n_eff_), 1e-300) : 1.0;
    return model;
}

double ArimaModel::forecast_one() const {
    if (!fitted_) {
        throw std::logic_error("ArimaModel::forecast_one: model is not fitted");
    }
    const int m = period_of(order_);
    const int D = order_.seasonal ? order_.seasonal->D : 0;
    const auto poly = differencing_polynomial(order_.d, D, m);
    const auto a = expand_ar(phi_, sphi_, m);
    const auto b = expand_ma(theta_, stheta_, m);
    double y_hat = intercept_;
    for (std::size_t k = 0; k < a.size(); ++k) {
        y_hat += a[k] * (y_tail_[y_tail_.size() - 1 - static_cast<Eigen::Index>(k)] - intercept_);
    }
    for (std::size_t k = 0; k < b.size() && static_cast<Eigen::Index>(k) < e_tail_.size(); ++k) {
        y_hat += b[k] * e_tail_[e_tail_.size() - 1 - static_cast<Eigen::Index>(k)];
    }
    double x_hat = y_hat;
    for (std::size_t k = 1; k < poly.size(); ++k) {
        x_hat -= poly[k] * x_tail_[x_tail_.size() - static_cast<Eigen::Index>(k)];
    }
    return x_hat;
}

bool ArimaModel::is_stationary() const {
    auto roots_outside = [](const std::vector<double>& coeffs) {
        const auto k = static_cast<Eigen::Index>(coeffs.size());
        if (k == 0) {
            return true;
        }
        // Companion matrix eigenvalues are the inverse roots of 1 - sum c_i z^i.
        Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(k, k);
        for (Eigen::Index i = 0; i < k; ++i) {
            companion(0, i) = coeffs[static_cast<std::size_t>(i)];
        }
        if (k > 1) {
            companion.bottomLeftCorner(k - 1, k - 1).setIdentity();
        }
        const Eigen::VectorXcd inv_roots = companion.eigenvalues();
        return (inv_roots.array().abs() < 1.0).all();
    };
    return roots_outside(phi_) && roots_outside(sphi_);
}

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

ArimaModel fit_arima_order(const TimeSeries& s, const ArimaOrder& order, bool include_intercept,
                           Eigen::Index score_from) {
    order.validate();
    const int m = period_of(order);
    const int D = order.seasonal ? order.seasonal->D : 0;
    const int P = order.seasonal ? order.seasonal->P : 0;
    const auto poly = differencing_polynomial(order.d, D, m);
    const Eigen::VectorXd y = apply_differencing(s.values(), poly);
    const Eigen::Index cond = std::max<Eigen::Index>(order.p + static_cast<Eigen::Index>(m) * P, score_from);
    const Eigen::Index n_eff = y.size() - cond;
    const int k = order.num_coefficients() + (include_intercept ? 1 : 0) + 1;
    if (n_eff - k - 1 <= 0) {
        throw std::invalid_argument("fit_arima_order: series too short for " + order.to_string());
    }
    const double ybar = include_intercept ? y.mean() : 0.0;

    Eigen::VectorXd e(y.size());
    auto objective = [&](const Eigen::VectorXd& v) {
        const Params p = unpack(v, order, include_intercept);
        if (!ar_polynomial_stationary(p.phi) || !ar_polynomial_stationary(p.sphi) || !invertible(p.theta) ||
            !invertible(p.stheta)) {
            return kInf;
        }
        return css_residuals(y, ybar + p.delta, expand_ar(p.phi, p.sphi, m), expand_ma(p.theta, p.stheta, m), e,
                             score_from);
    };

    const Eigen::Index dim = order.num_coefficients() + (include_intercept ? 1 : 0);
    const Eigen::VectorXd start = Eigen::VectorXd::Zero(dim);
    const optim::NelderMeadResult res = optim::nelder_mead(objective, start);
    if (!std::isfinite(res.value)) {
        throw std::runtime_error("fit_arima_order: non-finite objective for " + order.to_string());
    }

    const Params p = unpack(res.x, order, include_intercept);
    ArimaModel model;
    model.order_ = order;
    model.phi_ = p.phi;
    model.theta_ = p.theta;
    model.sphi_ = p.sphi;
    model.stheta_ = p.stheta;
    model.intercept_ = ybar + p.delta;
    model.has_intercept_ = include_intercept;
    model.set_state(s.values(), score_from);
    model.sigma2_ = std::max(model.css_ / static_cast<double>(model.n_eff_), 1e-300);
    model.aicc_ = aicc_from(model.css_, model.n_eff_, k);
    return model;
}

ArimaModel arima_fallback(const TimeSeries& s, int d, std::string reason) {
    ArimaModel model;
    model.order_ = ArimaOrder{0, d, 0, std::nullopt};
    const Eigen::VectorXd y = d == 0 ? s.values() : difference(s.values(), d);
    model.has_intercept_ = d <= 1;
    model.intercept_ = model.has_intercept_ ? y.mean() : 0.0;
    model.set_state(s.values());
    const int k = (model.has_intercept_ ? 1 : 0) + 1;
    model.sigma2_ = std::max(model.css_ / static_cast<double>(model.n_eff_), 1e-300);
    model.aicc_ = aicc_from(model.css_, model.n_eff_, k);
    model.fallback_ = true;
    model.fallback_reason_ = std::move(reason);
    return model;
}

namespace {

using OrderKey = std::tuple<int, int, int, int>;  // p, q, P, Q

struct Candidate {
    OrderKey key;
    double aicc = kInf;
};

int complexity(const OrderKey& k) { return std::get<0>(k) + std::get<1>(k) + std::get<2>(k) + std::get<3>(k); }
int ma_terms(const OrderKey& k) { return std::get<1>(k) + std::get<3>(k); }

// Lower AICc wins; ties go to fewer coefficients, then fewer MA terms.
bool better(const Candidate& a, const Candidate& b) {
    if (a.aicc != b.aicc) {
        return a.aicc < b.aicc;
    }
    if (complexity(a.key) != complexity(b.key)) {
        return complexity(a.key) < complexity(b.key);
    }
    if (ma_terms(a.key) != ma_terms(b.key)) {
        return ma_terms(a.key) < ma_terms(b.key);
    }
    return a.key < b.key;
}

struct StepwiseResult {
    std::optional<ArimaModel> best;
    std::vector<VisitedOrder> visited;
};

StepwiseResult stepwise(const TimeSeries& s, int d, int D, int m, bool intercept, const ArimaSearchBounds& bounds,
                        const std::vector<OrderKey>& starts, bool seasonal) {
    std::map<OrderKey, std::optional<ArimaModel>> cache;
    StepwiseResult out;
    // Every candidate is scored on the same residuals so AICc values compare.
    const Eigen::Index score_from = bounds.max_p + static_cast<Eigen::Index>(m) * (seasonal ? bounds.max_P : 0);

    auto in_bounds = [&](const OrderKey& k) {
        const auto [p, q, P, Q] = k;
        return p >= 0 && q >= 0 && P >= 0 && Q >= 0 && p <= bounds.max_p && q <= bounds.max_q &&
               P <= (seasonal ? bounds.max_P : 0) && Q <= (seasonal ? bounds.max_Q : 0);
    };
    auto evaluate = [&](const OrderKey& k) -> Candidate {
        auto it = cache.find(k);
        if (it == cache.end()) {
            const auto [p, q, P, Q] = k;
            ArimaOrder order{p, d, q, std::nullopt};
            if (seasonal) {
                order.seasonal = SeasonalOrder{P, D, Q, m};
            }
            std::optional<ArimaModel> fitted;
            try {
                fitted = fit_arima_order(s, order, intercept, score_from);
            } catch (const std::exception&) {
                fitted.reset();
            }
            if (fitted && near_unit_root(*fitted)) {
                fitted.reset();
            }
            const double aicc = fitted && std::isfinite(fitted->aicc()) ? fitted->aicc() : kInf;
            out.visited.push_back({order, aicc});
            it = cache.emplace(k, std::move(fitted)).first;
        }
        return {k, it->second ? it->second->aicc() : kInf};
    };

    std::optional<Candidate> current;
    for (const auto& k : starts) {
        if (!in_bounds(k)) {
            continue;
        }
        const Candidate c = evaluate(k);
        if (std::isfinite(c.aicc) && (!current || better(c, *current))) {
            current = c;
        }
    }
    if (!current) {
        return out;
    }
    for (int step = 0; step < bounds.max_steps; ++step) {
        const auto [p, q, P, Q] = current->key;
        std::vector<OrderKey> neighbours = {
            {p - 1, q, P, Q},     {p + 1, q, P, Q},     {p, q - 1, P, Q},     {p, q + 1, P, Q},
            {p - 1, q - 1, P, Q}, {p + 1, q + 1, P, Q}, {p - 1, q + 1, P, Q}, {p + 1, q - 1, P, Q},
        };
        if (seasonal) {
            const std::vector<OrderKey> seasonal_moves = {
                {p, q, P - 1, Q},     {p, q, P + 1, Q},     {p, q, P, Q - 1},     {p, q, P, Q + 1},
                {p, q, P - 1, Q - 1}, {p, q, P + 1, Q + 1}, {p, q, P - 1, Q + 1}, {p, q, P + 1, Q - 1},
            };
            neighbours.insert(neighbours.end(), seasonal_moves.begin(), seasonal_moves.end());
        }
        Candidate next = *current;
        for (const auto& k : neighbours) {
            if (!in_bounds(k)) {
                continue;
            }
            const Candidate c = evaluate(k);
            if (std::isfinite(c.aicc) && better(c, next)) {
                next = c;
            }
        }
        if (next.key == current->key) {
            break;
        }
        current = next;
    }
    out.best = *cache.at(current->key);
    return out;
}

}  // namespace

ArimaModel fit_arima(const TimeSeries& s, const ArimaSearchBounds& bounds) {
    const int d = select_d(s, bounds.max_d);
    const bool intercept = d <= 1;
    const std::vector<OrderKey> starts = {{0, 0, 0, 0}, {1, 0, 0, 0}, {0, 1, 0, 0}, {2, 2, 0, 0}};
    StepwiseResult result = stepwise(s, d, 0, 1, intercept, bounds, starts, false);
    ArimaModel model = result.best ? std::move(*result.best)
                                   : arima_fallback(s, d, "no candidate order produced a finite objective");
    model.visited_ = std::move(result.visited);
    return model;
}

ArimaModel fit_sarima(const TimeSeries& s, int m, const ArimaSearchBounds& bounds) {
    if (m < 1) {
        throw std::invalid_argument("fit_sarima: period must be >= 1");
    }
    if (m == 1) {
        return fit_arima(s, bounds);
    }
    const int D = bounds.max_D >= 1 ? select_seasonal_D(s.values(), m) : 0;
    int d = 0;
    if (D > 0) {
        const Eigen::VectorXd seasonal_diff = apply_differencing(s.values(), differencing_polynomial(0, D, m));
        d = select_d(TimeSeries(seasonal_diff), bounds.max_d);
    } else {
        d = select_d(s, bounds.max_d);
    }
    const bool intercept = d + D <= 1;
    const std::vector<OrderKey> starts = {{2, 2, 1, 1}, {0, 0, 0, 0}, {1, 0, 1, 0}, {0, 1, 0, 1}};
    StepwiseResult result = stepwise(s, d, D, m, intercept, bounds, starts, true);
    if (!result.best || !result.best->order().has_seasonal_terms()) {
        return fit_arima(s, bounds);
    }
    ArimaModel model = std::move(*result.best);
    model.visited_ = std::move(result.visited);
    return model;
}

}  // namespace tsbench::models
