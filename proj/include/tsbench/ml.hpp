#pragma once

#include "tsbench/random.hpp"
#include "tsbench/series.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace tsbench::ml {

/**
 * Sliding-window design matrix. Row i holds w consecutive values (most
 * recent last) and the target is the value that follows them. When
 * `differenced` is set everything lives on the first-difference scale and
 * `last_level` is the final original observation.
 */
struct SupervisedFrame {
    Eigen::MatrixXd features;
    Eigen::VectorXd targets;
    int window = 0;
    bool differenced = false;
    double last_level = 0.0;

    Eigen::Index rows() const noexcept { return features.rows(); }
    Eigen::Index cols() const noexcept { return features.cols(); }
};

SupervisedFrame build_frame(const TimeSeries& s, int window, bool differenced);

/// Last `window` values on the working scale, ready for prediction.
Eigen::RowVectorXd latest_features(const TimeSeries& s, int window, bool differenced);

// ---------------------------------------------------------------------------
// Trees
// ---------------------------------------------------------------------------

struct TreeNode {
    int feature = -1;  ///< -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  ///< leaf prediction
    int count = 0;       ///< training rows reaching the node
};

/// Binary regression tree stored as a flat node array; node 0 is the root.
class RegressionTree {
public:
    RegressionTree() = default;
    explicit RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

    template <typename Row>
    double predict(const Row& x) const {
        int i = 0;
        while (nodes_[static_cast<std::size_t>(i)].feature >= 0) {
            const TreeNode& n = nodes_[static_cast<std::size_t>(i)];
            i = x[n.feature] <= n.threshold ? n.left : n.right;
        }
        return nodes_[static_cast<std::size_t>(i)].value;
    }

    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
    const TreeNode& root() const { return nodes_.front(); }
    std::size_t leaf_count() const;
    int depth() const;

private:
    std::vector<TreeNode> nodes_;
};

struct TreeOptions {
    std::optional<int> mtry;       ///< features tried per node; all when empty
    std::optional<int> max_depth;  ///< unlimited when empty
    int min_node_size = 5;         ///< minimum rows in each child
    int min_split_size = 10;       ///< nodes with fewer rows are not split
};

/// The best CART split of a set of rows (exposed for oracle testing).
struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double sse = 0.0;  ///< children SSE
};

/**
 * Exhaustive CART split over `candidate_features` (ascending order is
 * used for tie-breaking) for the given row subset; midpoints between
 * consecutive distinct values are the thresholds. Returns nullopt when
 * no admissible split reduces the SSE.
 */
std::optional<SplitChoice> best_cart_split(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                           const std::vector<int>& rows, std::vector<int> candidate_features,
                                           int min_node_size);

/// Greedy CART fit on the given rows (all rows when empty; duplicates allowed for bootstrap).
RegressionTree fit_tree(const SupervisedFrame& frame, const TreeOptions& options, Rng& rng,
                        const std::vector<int>& rows = {});

// ---------------------------------------------------------------------------
// Random forest
// ---------------------------------------------------------------------------

struct ForestOptions {
    int trees = 500;
    std::optional<int> mtry;  ///< default floor(w / 3), at least 1
    int min_node_size = 5;
    int threads = 1;
};

class ForestModel {
public:
    ForestModel() = default;
    explicit ForestModel(std::vector<RegressionTree> trees, int mtry) : trees_(std::move(trees)), mtry_(mtry) {}

    template <typename Row>
    double predict(const Row& x) const {
        double sum = 0.0;
        for (const auto& t : trees_) sum += t.predict(x);
        return sum / static_cast<double>(trees_.size());
    }

    const std::vector<RegressionTree>& trees() const noexcept { return trees_; }
    int mtry() const noexcept { return mtry_; }

private:
    std::vector<RegressionTree> trees_;
    int mtry_ = 1;
};

int default_mtry(int features);

/// Each tree uses its own stream derived from (seed, tree index), so thread count does not change the result.
ForestModel fit_forest(const SupervisedFrame& frame, std::uint64_t seed, const ForestOptions& options = {});

template <typename Row>
double forest_predict(const ForestModel& model, const Row& x) {
    return model.predict(x);
}

// ---------------------------------------------------------------------------
// Gradient boosting
// ---------------------------------------------------------------------------

struct BoostOptions {
    int rounds = 100;
    double learning_rate = 0.3;
    int max_depth = 6;
    double lambda_reg = 1.0;
    double min_child_weight = 1.0;
};

class BoostedModel {
public:
    BoostedModel() = default;
    BoostedModel(double base_score, double learning_rate, std::vector<RegressionTree> rounds)
        : base_(base_score), eta_(learning_rate), rounds_(std::move(rounds)) {}

    template <typename Row>
    double predict(const Row& x) const {
        double sum = 0.0;
        for (const auto& t : rounds_) sum += t.predict(x);
        return base_ + eta_ * sum;
    }

    /// Prediction using only the first `k` rounds.
    template <typename Row>
    double predict_rounds(const Row& x, std::size_t k) const {
        double sum = 0.0;
        for (std::size_t i = 0; i < k && i < rounds_.size(); ++i) sum += rounds_[i].predict(x);
        return base_ + eta_ * sum;
    }

    double base_score() const noexcept { return base_; }
    double learning_rate() const noexcept { return eta_; }
    const std::vector<RegressionTree>& rounds() const noexcept { return rounds_; }

private:
    double base_ = 0.0;
    double eta_ = 0.3;
    std::vector<RegressionTree> rounds_;
};

/// Squared-loss boosting with second-order leaf weights -G / (H + lambda) and exact greedy splits.
BoostedModel fit_boosted(const SupervisedFrame& frame, std::uint64_t seed, const BoostOptions& options = {});

template <typename Row>
double boosted_predict(const BoostedModel& model, const Row& x) {
    return model.predict(x);
}

/// One-step forecast from the last `window` values; differenced models are integrated back.
template <typename Model>
double ml_forecast_one(const Model& model, const TimeSeries& s, int window, bool differenced) {
    const Eigen::RowVectorXd row = latest_features(s, window, differenced);
    const double out = model.predict(row);
    return differenced ? integrate_one(s.back(), out) : out;
}

}  // namespace tsbench::ml
