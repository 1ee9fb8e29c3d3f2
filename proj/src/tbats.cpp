#include "tsbench/tbats.hpp"

#include "tsbench/arima.hpp"
#include "tsbench/optimize.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>

namespace tsbench::models {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

double box_cox(double x, double lambda) {
    if (lambda == 1.0) {
        return x;
    }
    if (!(x > 0.0)) {
        throw std::domain_error("box_cox: requires positive input for lambda != 1");
    }
    return lambda == 0.0 ? std::log(x) : (std::pow(x, lambda) - 1.0) / lambda;
}

double inv_box_cox(double z, double lambda) {
    if (lambda == 1.0) {
        return z;
    }
    if (lambda == 0.0) {
        return std::exp(z);
    }
    const double base = lambda * z + 1.0;
    return base > 0.0 ? std::pow(base, 1.0 / lambda) : 0.0;
}

Eigen::VectorXd box_cox(const Eigen::VectorXd& x, double lambda) {
    return x.unaryExpr([lambda](double v) { return box_cox(v, lambda); });
}

Eigen::VectorXd inv_box_cox(const Eigen::VectorXd& z, double lambda) {
    return z.unaryExpr([lambda](double v) { return inv_box_cox(v, lambda); });
}

namespace {

struct Structure {
    bool trend = true;
    int p = 0;
    int q = 0;
    int period = 0;
    int harmonics = 0;

    bool seasonal() const { return period >= 2 && harmonics > 0; }
    int num_seeds() const { return 1 + (trend ? 1 : 0) + (seasonal() ? 2 * harmonics : 0); }
    int num_params() const { return 1 + (trend ? 2 : 0) + (seasonal() ? 2 : 0) + p + q; }
};

struct Smoothing {
    double alpha = 0.0, beta = 0.0, phi = 1.0, gamma1 = 0.0, gamma2 = 0.0;
    std::vector<double> ar, ma;
};

Smoothing decode(const Eigen::VectorXd& u, const Structure& st) {
    Smoothing sm;
    Eigen::Index i = 0;
    sm.alpha = logistic(u[i++]);
    if (st.trend) {
        sm.beta = sm.alpha * logistic(u[i++]);
        sm.phi = 0.8 + 0.2 * logistic(u[i++]);
    }
    if (st.seasonal()) {
        sm.gamma1 = 0.5 * std::tanh(u[i++]);
        sm.gamma2 = 0.5 * std::tanh(u[i++]);
    }
    for (int k = 0; k < st.p; ++k) sm.ar.push_back(u[i++]);
    for (int k = 0; k < st.q; ++k) sm.ma.push_back(u[i++]);
    return sm;
}

struct FilterState {
    double level = 0.0;
    double slope = 0.0;
    std::vector<double> s, s_star;
    std::vector<double> d_hist, e_hist;  // most recent first
};

// Runs the state-space recursion; returns false if it diverged. Residuals are written into `e`.
bool run_filter(const Eigen::VectorXd& y, const Structure& st, const Smoothing& sm, const Eigen::VectorXd& seeds,
                Eigen::Ref<Eigen::VectorXd> e, FilterState* final_state = nullptr) {
    FilterState fs;
    Eigen::Index i = 0;
    fs.level = seeds[i++];
    if (st.trend) {
        fs.slope = seeds[i++];
    }
    const int k = st.seasonal() ? st.harmonics : 0;
    fs.s.assign(static_cast<std::size_t>(k), 0.0);
    fs.s_star.assign(static_cast<std::size_t>(k), 0.0);
    for (int j = 0; j < k; ++j) fs.s[static_cast<std::size_t>(j)] = seeds[i++];
    for (int j = 0; j < k; ++j) fs.s_star[static_cast<std::size_t>(j)] = seeds[i++];
    fs.d_hist.assign(static_cast<std::size_t>(st.p), 0.0);
    fs.e_hist.assign(static_cast<std::size_t>(st.q), 0.0);

    std::vector<double> cos_w(static_cast<std::size_t>(k)), sin_w(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        const double w = 2.0 * std::numbers::pi * (j + 1) / st.period;
        cos_w[static_cast<std::size_t>(j)] = std::cos(w);
        sin_w[static_cast<std::size_t>(j)] = std::sin(w);
    }

    for (Eigen::Index t = 0; t < y.size(); ++t) {
        double structural = fs.level + (st.trend ? sm.phi * fs.slope : 0.0);
        for (int j = 0; j < k; ++j) structural += fs.s[static_cast<std::size_t>(j)];
        double arma = 0.0;
        for (int a = 0; a < st.p; ++a) arma += sm.ar[static_cast<std::size_t>(a)] * fs.d_hist[static_cast<std::size_t>(a)];
        for (int c = 0; c < st.q; ++c) arma += sm.ma[static_cast<std::size_t>(c)] * fs.e_hist[static_cast<std::size_t>(c)];
        const double d = y[t] - structural;
        const double err = d - arma;
        if (!std::isfinite(err) || std::abs(err) > 1e150) {
            return false;
        }
        e[t] = err;

        fs.level += (st.trend ? sm.phi * fs.slope : 0.0) + sm.alpha * d;
        if (st.trend) {
            fs.slope = sm.phi * fs.slope + sm.beta * d;
        }
        for (int j = 0; j < k; ++j) {
            const auto jj = static_cast<std::size_t>(j);
            const double s_old = fs.s[jj];
            const double ss_old = fs.s_star[jj];
            fs.s[jj] = s_old * cos_w[jj] + ss_old * sin_w[jj] + sm.gamma1 * d;
            fs.s_star[jj] = -s_old * sin_w[jj] + ss_old * cos_w[jj] + sm.gamma2 * d;
        }
        if (st.p > 0) {
            fs.d_hist.insert(fs.d_hist.begin(), d);
            fs.d_hist.pop_back();
        }
        if (st.q > 0) {
            fs.e_hist.insert(fs.e_hist.begin(), err);
            fs.e_hist.pop_back();
        }
    }
    if (final_state) {
        *final_state = std::move(fs);
    }
    return true;
}

struct Evaluation {
    double sse = kInf;
    Eigen::VectorXd seeds;
};

// Residuals are affine in the seed states, so the optimal seeds come from a small least-squares solve.
Evaluation evaluate(const Eigen::VectorXd& y, const Structure& st, const Smoothing& sm) {
    Evaluation out;
    if (!ar_polynomial_stationary(sm.ar)) {
        return out;
    }
    std::vector<double> neg_ma(sm.ma.size());
    for (std::size_t i = 0; i < sm.ma.size(); ++i) neg_ma[i] = -sm.ma[i];
    if (!ar_polynomial_stationary(neg_ma)) {
        return out;
    }
    const int K = st.num_seeds();
    const Eigen::Index n = y.size();
    Eigen::VectorXd base(n);
    if (!run_filter(y, st, sm, Eigen::VectorXd::Zero(K), base)) {
        return out;
    }
    Eigen::MatrixXd sens(n, K);
    const Eigen::VectorXd zeros = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < K; ++j) {
        if (!run_filter(zeros, st, sm, Eigen::VectorXd::Unit(K, j), sens.col(j))) {
            return out;
        }
    }
    const Eigen::MatrixXd gram = sens.transpose() * sens;
    const Eigen::VectorXd rhs = -(sens.transpose() * base);
    Eigen::VectorXd seeds = gram.ldlt().solve(rhs);
    if (!seeds.allFinite()) {
        seeds = sens.colPivHouseholderQr().solve(-base);
    }
    if (!seeds.allFinite()) {
        return out;
    }
    const double sse = (base + sens * seeds).squaredNorm();
    if (!std::isfinite(sse)) {
        return out;
    }
    out.sse = sse;
    out.seeds = std::move(seeds);
    return out;
}

double information_criterion(double sse, Eigen::Index n, const Structure& st, double log_jacobian_term) {
    const double nn = static_cast<double>(n);
    const double floor_sse = std::max(sse, 1e-300);
    const int k = st.num_params() + st.num_seeds() + 1;
    return nn * std::log(floor_sse / nn) - log_jacobian_term + 2.0 * k;
}

struct Candidate {
    Structure st;
    Eigen::VectorXd u;
    double sse = kInf;
    double aic = kInf;
    double lambda = 1.0;
};

Candidate optimise(const Eigen::VectorXd& y, const Structure& st, const Eigen::VectorXd& start, double lambda,
                   double log_jacobian_term) {
    auto objective = [&](const Eigen::VectorXd& u) { return evaluate(y, st, decode(u, st)).sse; };
    const optim::NelderMeadResult res = optim::nelder_mead(objective, start);
    Candidate c;
    c.st = st;
    c.u = res.x;
    c.lambda = lambda;
    c.sse = res.value;
    c.aic = std::isfinite(res.value) ? information_criterion(res.value, y.size(), st, log_jacobian_term) : kInf;
    return c;
}

Eigen::VectorXd default_start(const Structure& st) {
    Eigen::VectorXd u(st.num_params());
    Eigen::Index i = 0;
    u[i++] = logit(0.3);
    if (st.trend) {
        u[i++] = logit(0.1);
        u[i++] = logit(0.9);  // phi = 0.98
    }
    if (st.seasonal()) {
        u[i++] = 0.0;
        u[i++] = 0.0;
    }
    for (int k = 0; k < st.p + st.q; ++k) u[i++] = 0.0;
    return u;
}

// Chooses ARMA(p, q) orders for the residuals of the structural fit by AICc over the full grid.
std::pair<int, int> choose_error_orders(const Eigen::VectorXd& residuals, int max_p, int max_q,
                                        std::vector<double>& ar, std::vector<double>& ma) {
    const TimeSeries r(residuals);
    double best = kInf;
    std::pair<int, int> order{0, 0};
    for (int p = 0; p <= max_p; ++p) {
        for (int q = 0; q <= max_q; ++q) {
            try {
                const ArimaModel m = fit_arima_order(r, ArimaOrder{p, 0, q, std::nullopt}, false);
                if (m.aicc() < best) {
                    best = m.aicc();
                    order = {p, q};
                    ar = m.ar();
                    ma = m.ma();
                }
            } catch (const std::exception&) {
            }
        }
    }
    return order;
}

}  // namespace

struct TbatsFitter {
    static TbatsLiteModel finish(const Eigen::VectorXd& y, const Candidate& c, bool fallback) {
        const Smoothing sm = decode(c.u, c.st);
        const Evaluation ev = evaluate(y, c.st, sm);
        if (!std::isfinite(ev.sse)) {
            throw std::runtime_error("fit_tbats_lite: selected model cannot be re-evaluated");
        }
        Eigen::VectorXd e(y.size());
        FilterState fs;
        run_filter(y, c.st, sm, ev.seeds, e, &fs);

        TbatsLiteModel model;
        model.fitted_ = true;
        model.lambda_ = c.lambda;
        model.alpha_ = sm.alpha;
        model.beta_ = sm.beta;
        model.phi_ = sm.phi;
        model.trend_ = c.st.trend;
        model.ar_ = sm.ar;
        model.ma_ = sm.ma;
        model.period_ = c.st.seasonal() ? c.st.period : 0;
        model.harmonics_ = c.st.seasonal() ? c.st.harmonics : 0;
        model.gamma1_ = sm.gamma1;
        model.gamma2_ = sm.gamma2;
        model.aic_ = c.aic;
        model.sse_ = ev.sse;
        model.fallback_ = fallback;
        model.level_ = fs.level;
        model.slope_ = fs.slope;
        model.season_ = fs.s;
        model.season_star_ = fs.s_star;
        model.d_tail_ = fs.d_hist;
        model.e_tail_ = fs.e_hist;
        return model;
    }
};

double TbatsLiteModel::forecast_one() const {
    if (!fitted_) {
        throw std::logic_error("TbatsLiteModel::forecast_one: model is not fitted");
    }
    double z = level_ + (trend_ ? phi_ * slope_ : 0.0);
    for (const double s : season_) z += s;
    for (std::size_t i = 0; i < ar_.size(); ++i) z += ar_[i] * d_tail_[i];
    for (std::size_t i = 0; i < ma_.size(); ++i) z += ma_[i] * e_tail_[i];
    return inv_box_cox(z, lambda_);
}

TbatsLiteModel fit_tbats_lite(const TimeSeries& s, const TbatsOptions& options) {
    if (s.size() < 20) {
        throw std::invalid_argument("fit_tbats_lite: series must have at least 20 observations");
    }
    const Eigen::VectorXd& x = s.values();
    const bool positive = (x.array() > 0.0).all();
    std::vector<double> grid = positive ? options.lambda_grid : std::vector<double>{1.0};
    if (grid.empty()) {
        grid = {1.0};
    }
    const double sum_log = positive ? x.array().log().sum() : 0.0;

    std::optional<Candidate> best;
    Eigen::VectorXd best_y;
    for (const double lambda : grid) {
        const Eigen::VectorXd y = box_cox(x, lambda);
        const double jac = 2.0 * (lambda - 1.0) * sum_log;

        Structure base;
        base.trend = true;
        if (options.period >= 2) {
            base.period = options.period;
            base.harmonics = std::max(1, options.harmonics);
        }
        Candidate c = optimise(y, base, default_start(base), lambda, jac);
        if (!std::isfinite(c.aic)) {
            continue;
        }

        // ARMA error structure picked on the residuals of the structural fit, then refitted jointly.
        const Smoothing sm = decode(c.u, base);
        const Evaluation ev = evaluate(y, base, sm);
        Eigen::VectorXd resid(y.size());
        run_filter(y, base, sm, ev.seeds, resid);
        std::vector<double> ar, ma;
        const auto [p, q] = choose_error_orders(resid, options.max_p, options.max_q, ar, ma);
        if (p + q > 0) {
            Structure with_arma = base;
            with_arma.p = p;
            with_arma.q = q;
            Eigen::VectorXd start(with_arma.num_params());
            start.head(c.u.size()) = c.u;
            for (int i = 0; i < p; ++i) start[c.u.size() + i] = ar[static_cast<std::size_t>(i)];
            for (int i = 0; i < q; ++i) start[c.u.size() + p + i] = ma[static_cast<std::size_t>(i)];
            Candidate joint = optimise(y, with_arma, start, lambda, jac);
            if (joint.aic < c.aic) {
                c = std::move(joint);
            }
        }
        if (!best || c.aic < best->aic) {
            best = std::move(c);
            best_y = y;
        }
    }
    if (best) {
        return TbatsFitter::finish(best_y, *best, false);
    }

    // Simple exponential smoothing on the raw scale.
    Structure ses;
    ses.trend = false;
    Candidate c = optimise(x, ses, default_start(ses), 1.0, 0.0);
    if (!std::isfinite(c.aic)) {
        c.u = Eigen::VectorXd::Constant(1, 20.0);  // alpha -> 1: last value
        c.aic = kInf;
    }
    return TbatsFitter::finish(x, c, true);
}

}  // namespace tsbench::models
