#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace tsbench::optim {

struct NelderMeadOptions {
    double ftol = 1e-8;              ///< stop when the simplex spread in f falls below this (relative + absolute)
    int max_evals_per_dim = 500;     ///< evaluation budget is max_evals_per_dim * dim
    int restarts = 2;                ///< fresh simplices built around the incumbent after convergence
    double initial_step = 0.1;       ///< simplex edge, scaled by max(|x_i|, 1)
};

struct NelderMeadResult {
    Eigen::VectorXd x;
    double value = std::numeric_limits<double>::infinity();
    int evaluations = 0;
    bool converged = false;
};

/**
 * Derivative-free minimisation by the Nelder-Mead simplex method.
 *
 * Non-finite objective values are treated as +inf, so constraints can be
 * imposed by returning infinity outside the feasible region. The budget
 * is shared across restarts.
 */
template <typename Objective>
NelderMeadResult nelder_mead(Objective&& f, const Eigen::VectorXd& start, const NelderMeadOptions& opt = {}) {
    const Eigen::Index dim = start.size();
    NelderMeadResult best;
    best.x = start;
    const int budget = opt.max_evals_per_dim * static_cast<int>(std::max<Eigen::Index>(dim, 1));

    auto eval = [&](const Eigen::VectorXd& x) {
        ++best.evaluations;
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    best.value = eval(start);
    if (dim == 0) {
        best.converged = std::isfinite(best.value);
        return best;
    }

    constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;

    for (int round = 0; round <= opt.restarts; ++round) {
        std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(dim + 1), best.x);
        std::vector<double> vals(static_cast<std::size_t>(dim + 1), best.value);
        for (Eigen::Index i = 0; i < dim; ++i) {
            auto& p = pts[static_cast<std::size_t>(i + 1)];
            p[i] += opt.initial_step * std::max(std::abs(p[i]), 1.0);
            vals[static_cast<std::size_t>(i + 1)] = eval(p);
        }
        std::vector<std::size_t> order(pts.size());
        bool converged = false;
        while (best.evaluations < budget) {
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
            const std::size_t lo = order.front();
            const std::size_t hi = order.back();
            const std::size_t second = order[order.size() - 2];
            const double spread = vals[hi] - vals[lo];
            if (std::isfinite(vals[hi]) && spread <= opt.ftol * (std::abs(vals[lo]) + opt.ftol)) {
                converged = true;
                break;
            }
            Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
            for (std::size_t k = 0; k + 1 < order.size(); ++k) {
                centroid += pts[order[k]];
            }
            centroid /= static_cast<double>(dim);

            const Eigen::VectorXd reflected = centroid + kReflect * (centroid - pts[hi]);
            const double f_reflected = eval(reflected);
            if (f_reflected < vals[lo]) {
                const Eigen::VectorXd expanded = centroid + kExpand * (reflected - centroid);
                const double f_expanded = eval(expanded);
                if (f_expanded < f_reflected) {
                    pts[hi] = expanded;
                    vals[hi] = f_expanded;
                } else {
                    pts[hi] = reflected;
                    vals[hi] = f_reflected;
                }
                continue;
            }
            if (f_reflected < vals[second]) {
                pts[hi] = reflected;
                vals[hi] = f_reflected;
                continue;
            }
            const bool outside = f_reflected < vals[hi];
            const Eigen::VectorXd contracted = outside ? Eigen::VectorXd(centroid + kContract * (reflected - centroid))
                                                       : Eigen::VectorXd(centroid + kContract * (pts[hi] - centroid));
            const double f_contracted = eval(contracted);
            if (f_contracted < std::min(f_reflected, vals[hi])) {
                pts[hi] = contracted;
                vals[hi] = f_contracted;
                continue;
            }
            for (std::size_t k = 1; k < order.size(); ++k) {
                auto& p = pts[order[k]];
                p = pts[lo] + kShrink * (p - pts[lo]);
                vals[order[k]] = eval(p);
            }
        }
        const auto it = std::min_element(vals.begin(), vals.end());
        const double previous = best.value;
        if (*it < best.value) {
            best.value = *it;
            best.x = pts[static_cast<std::size_t>(it - vals.begin())];
        }
        best.converged = converged;
        if (!converged || best.evaluations >= budget) {
            break;
        }
        // A restart that cannot improve the incumbent ends the search.
        if (round > 0 && !(best.value < previous - opt.ftol * (std::abs(previous) + opt.ftol))) {
            break;
        }
    }
    return best;
}

}  // namespace tsbench::optim
