#pragma once

// Reference computations written independently of the library code.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

/// Autocovariances gamma_0..gamma_p of a stationary AR(p) with N(0, sigma2) noise (Yule-Walker system).
inline std::vector<double> ar_autocovariances(const std::vector<double>& phi, double sigma2 = 1.0) {
    const int p = static_cast<int>(phi.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(p + 1, p + 1);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(p + 1);
    b(0) = sigma2;
    // gamma_k - sum_i phi_i gamma_{|k-i|} = sigma2 * [k == 0]; for k = 0 the noise term enters via gamma_0.
    for (int k = 0; k <= p; ++k) {
        for (int i = 1; i <= p; ++i) {
            a(k, std::abs(k - i)) -= phi[static_cast<std::size_t>(i - 1)];
        }
    }
    const Eigen::VectorXd g = a.fullPivLu().solve(b);
    return {g.data(), g.data() + g.size()};
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Kolmogorov-Smirnov distance between a sample and a CDF.
template <typename Cdf>
double ks_distance(std::vector<double> sample, Cdf cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
    }
    return d;
}

/// Mean number in system of a stable M/M/c queue (Erlang C).
inline double mmc_mean_in_system(double lambda, double mu, int c) {
    const double a = lambda / mu;
    const double rho = a / c;
    double term = 1.0, sum = 0.0;
    for (int k = 0; k < c; ++k) {
        if (k > 0) term *= a / k;
        sum += term;
    }
    const double last = term * a / c / (1.0 - rho);  // a^c / c! / (1 - rho)
    const double p_wait = last / (sum + last);
    return p_wait * rho / (1.0 - rho) + a;
}

struct BruteSplit {
    int feature = -1;
    double threshold = 0.0;
    double sse = std::numeric_limits<double>::infinity();
};

inline double two_pass_sse(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s;
}

/// Exhaustive search over features and midpoint thresholds; lowest feature then lowest threshold among near-ties.
inline BruteSplit brute_force_split(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int min_node_size) {
    BruteSplit best;
    std::vector<double> ally(y.data(), y.data() + y.size());
    const double parent = two_pass_sse(ally);
    for (int j = 0; j < x.cols(); ++j) {
        std::vector<double> vals(x.col(j).data(), x.col(j).data() + x.rows());
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
            const double thr = 0.5 * (vals[k] + vals[k + 1]);
            std::vector<double> l, r;
            for (Eigen::Index i = 0; i < x.rows(); ++i) (x(i, j) <= thr ? l : r).push_back(y(i));
            if (static_cast<int>(l.size()) < min_node_size || static_cast<int>(r.size()) < min_node_size) continue;
            const double sse = two_pass_sse(l) + two_pass_sse(r);
            const double tol = 1e-9 * std::max(1.0, std::abs(parent));
            if (sse < best.sse - tol) best = {j, thr, sse};
        }
    }
    if (!(best.sse < parent - 1e-9 * std::max(1.0, std::abs(parent)))) return {};
    return best;
}

}  // namespace oracle
