#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tsbench {

/**
 * Immutable, finite-valued univariate series.
 *
 * The origin string records where the values came from (generator, overlay,
 * seed, length) so that files written downstream stay traceable.
 */
class TimeSeries {
public:
    TimeSeries(Eigen::VectorXd values, std::string origin = {});
    TimeSeries(std::initializer_list<double> values, std::string origin = {});
    explicit TimeSeries(const std::vector<double>& values, std::string origin = {});

    const Eigen::VectorXd& values() const noexcept { return values_; }
    const std::string& origin() const noexcept { return origin_; }
    Eigen::Index size() const noexcept { return values_.size(); }
    double operator[](Eigen::Index i) const { return values_[i]; }
    double front() const { return values_[0]; }
    double back() const { return values_[values_.size() - 1]; }

    /// First `count` values as a new series (same origin, suffixed).
    TimeSeries head(Eigen::Index count) const;
    /// Values [start, start + count) as a new series.
    TimeSeries segment(Eigen::Index start, Eigen::Index count) const;

    std::vector<double> to_vector() const { return {values_.data(), values_.data() + values_.size()}; }

private:
    Eigen::VectorXd values_;
    std::string origin_;
};

/// Raised when a metric has no defined value (e.g. MAPE with all-zero actuals).
class UndefinedMetricError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct MetricPair {
    double mse = 0.0;
    double mape = 0.0;  // percent
    std::size_t n_evaluated = 0;
    std::size_t n_skipped_zero_actual = 0;
};

/**
 * Applies x_t -> x_t - x_{t-1} `order` times. The result is `order` shorter.
 */
template <typename Derived>
Eigen::VectorXd difference(const Eigen::DenseBase<Derived>& x, int order = 1) {
    if (order < 1) {
        throw std::invalid_argument("difference: order must be >= 1");
    }
    if (x.size() <= order) {
        throw std::invalid_argument("difference: series length " + std::to_string(x.size()) +
                                    " must exceed order " + std::to_string(order));
    }
    Eigen::VectorXd out = x;
    for (int pass = 0; pass < order; ++pass) {
        const Eigen::Index m = out.size() - 1;
        Eigen::VectorXd next = out.tail(m) - out.head(m);
        out = std::move(next);
    }
    return out;
}

TimeSeries difference(const TimeSeries& s, int order = 1);

/// Inverse of a single difference step for a one-step forecast.
inline double integrate_one(double last_level, double predicted_diff) {
    if (!std::isfinite(last_level) || !std::isfinite(predicted_diff)) {
        throw std::invalid_argument("integrate_one: non-finite input");
    }
    return last_level + predicted_diff;
}

template <typename A, typename P>
double mse(const Eigen::DenseBase<A>& actual, const Eigen::DenseBase<P>& predicted) {
    if (actual.size() == 0 || actual.size() != predicted.size()) {
        throw std::invalid_argument("mse: sequences must be non-empty and of equal length");
    }
    const auto a = actual.derived().template cast<double>().array();
    const auto p = predicted.derived().template cast<double>().array();
    if (!a.allFinite() || !p.allFinite()) {
        throw std::invalid_argument("mse: non-finite input");
    }
    return (a - p).square().sum() / static_cast<double>(actual.size());
}

/**
 * Mean absolute percentage error in percent. Points whose actual value is
 * exactly zero are skipped and counted instead of being padded.
 * Returns {mape, skipped}.
 */
template <typename A, typename P>
std::pair<double, std::size_t> mape(const Eigen::DenseBase<A>& actual, const Eigen::DenseBase<P>& predicted) {
    if (actual.size() == 0 || actual.size() != predicted.size()) {
        throw std::invalid_argument("mape: sequences must be non-empty and of equal length");
    }
    double total = 0.0;
    std::size_t used = 0;
    std::size_t skipped = 0;
    for (Eigen::Index i = 0; i < actual.size(); ++i) {
        const double a = static_cast<double>(actual.derived().coeff(i));
        const double p = static_cast<double>(predicted.derived().coeff(i));
        if (a == 0.0) {
            ++skipped;
            continue;
        }
        total += 100.0 * std::abs(a - p) / std::abs(a);
        ++used;
    }
    if (used == 0) {
        throw UndefinedMetricError("mape: every actual value is zero");
    }
    return {total / static_cast<double>(used), skipped};
}

inline Eigen::Map<const Eigen::VectorXd> as_eigen(const std::vector<double>& v) {
    return {v.data(), static_cast<Eigen::Index>(v.size())};
}

/// MSE and MAPE together. When every actual is zero the MAPE is NaN and n_evaluated is 0.
MetricPair score(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted);

/// Unbiased sample variance.
double sample_variance(const Eigen::VectorXd& x);

}  // namespace tsbench
