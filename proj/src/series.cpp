#include "tsbench/series.hpp"

#include <limits>

namespace tsbench {

namespace {

Eigen::VectorXd checked(Eigen::VectorXd values) {
    if (values.size() < 1) {
        throw std::invalid_argument("TimeSeries: length must be >= 1");
    }
    if (!values.allFinite()) {
        throw std::invalid_argument("TimeSeries: values must be finite");
    }
    return values;
}

Eigen::VectorXd from_std(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

TimeSeries::TimeSeries(Eigen::VectorXd values, std::string origin)
    : values_(checked(std::move(values))), origin_(std::move(origin)) {}

TimeSeries::TimeSeries(std::initializer_list<double> values, std::string origin)
    : TimeSeries(std::vector<double>(values), std::move(origin)) {}

TimeSeries::TimeSeries(const std::vector<double>& values, std::string origin)
    : values_(checked(from_std(values))), origin_(std::move(origin)) {}

TimeSeries TimeSeries::head(Eigen::Index count) const {
    if (count < 1 || count > size()) {
        throw std::out_of_range("TimeSeries::head: bad count");
    }
    return {values_.head(count), origin_};
}

TimeSeries TimeSeries::segment(Eigen::Index start, Eigen::Index count) const {
    if (start < 0 || count < 1 || start + count > size()) {
        throw std::out_of_range("TimeSeries::segment: bad range");
    }
    return {values_.segment(start, count), origin_};
}

TimeSeries difference(const TimeSeries& s, int order) {
    return {difference(s.values(), order), s.origin() + "|diff" + std::to_string(order)};
}

MetricPair score(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted) {
    MetricPair out;
    out.mse = mse(actual, predicted);
    try {
        const auto [value, skipped] = mape(actual, predicted);
        out.mape = value;
        out.n_skipped_zero_actual = skipped;
        out.n_evaluated = static_cast<std::size_t>(actual.size()) - skipped;
    } catch (const UndefinedMetricError&) {
        out.mape = std::numeric_limits<double>::quiet_NaN();
        out.n_evaluated = 0;
        out.n_skipped_zero_actual = static_cast<std::size_t>(actual.size());
    }
    return out;
}

double sample_variance(const Eigen::VectorXd& x) {
    if (x.size() < 2) {
        throw std::invalid_argument("sample_variance: need at least two values");
    }
    const double mean = x.mean();
    return (x.array() - mean).square().sum() / static_cast<double>(x.size() - 1);
}

}  // namespace tsbench
