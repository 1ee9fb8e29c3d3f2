#include "tsbench/ml.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace tsbench::ml {

// ---------------------------------------------------------------------------
// Frames
// ---------------------------------------------------------------------------

SupervisedFrame build_frame(const TimeSeries& s, int window, bool differenced) {
    if (window < 1) {
        throw std::invalid_argument("build_frame: window must be >= 1");
    }
    const Eigen::VectorXd work = differenced ? difference(s.values(), 1) : s.values();
    const Eigen::Index rows = work.size() - window;
    if (rows < 1) {
        throw std::invalid_argument("build_frame: series of length " + std::to_string(s.size()) +
                                    " is too short for window " + std::to_string(window) +
                                    (differenced ? " on the differenced scale" : ""));
    }
    SupervisedFrame frame;
    frame.window = window;
    frame.differenced = differenced;
    frame.last_level = s.back();
    frame.features.resize(rows, window);
    frame.targets.resize(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        frame.features.row(i) = work.segment(i, window).transpose();
        frame.targets[i] = work[i + window];
    }
    return frame;
}

Eigen::RowVectorXd latest_features(const TimeSeries& s, int window, bool differenced) {
    const Eigen::Index needed = window + (differenced ? 1 : 0);
    if (window < 1 || s.size() < needed) {
        throw std::invalid_argument("latest_features: need at least " + std::to_string(needed) + " observations");
    }
    if (differenced) {
        return difference(s.values().tail(needed), 1).transpose();
    }
    return s.values().tail(window).transpose();
}

// ---------------------------------------------------------------------------
// CART
// ---------------------------------------------------------------------------

std::size_t RegressionTree::leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

int RegressionTree::depth() const {
    if (nodes_.empty()) {
        return 0;
    }
    std::vector<int> level(nodes_.size(), 0);
    int deepest = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const TreeNode& n = nodes_[i];
        if (n.feature >= 0) {
            level[static_cast<std::size_t>(n.left)] = level[i] + 1;
            level[static_cast<std::size_t>(n.right)] = level[i] + 1;
            deepest = std::max(deepest, level[i] + 1);
        }
    }
    return deepest;
}

std::optional<SplitChoice> best_cart_split(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                           const std::vector<int>& rows, std::vector<int> candidate_features,
                                           int min_node_size) {
    const auto n = static_cast<int>(rows.size());
    if (n < 2) {
        return std::nullopt;
    }
    std::sort(candidate_features.begin(), candidate_features.end());
    double total = 0.0;
    double total_sq = 0.0;
    for (const int r : rows) {
        total += y[r];
        total_sq += y[r] * y[r];
    }
    const double parent_score = total * total / n;
    const double tol = 1e-12 * std::max(total_sq, 1e-300);
    const int min_child = std::max(1, min_node_size);

    std::optional<SplitChoice> best;
    double best_score = parent_score + tol;
    std::vector<std::pair<double, double>> pairs(static_cast<std::size_t>(n));
    for (const int f : candidate_features) {
        for (int i = 0; i < n; ++i) {
            const int r = rows[static_cast<std::size_t>(i)];
            pairs[static_cast<std::size_t>(i)] = {x(r, f), y[r]};
        }
        std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        double left = 0.0;
        for (int i = 0; i + 1 < n; ++i) {
            left += pairs[static_cast<std::size_t>(i)].second;
            const double xi = pairs[static_cast<std::size_t>(i)].first;
            const double xn = pairs[static_cast<std::size_t>(i + 1)].first;
            if (xi == xn) {
                continue;
            }
            const int nl = i + 1;
            const int nr = n - nl;
            if (nl < min_child || nr < min_child) {
                continue;
            }
            const double right = total - left;
            const double score = left * left / nl + right * right / nr;
            if (best ? score > best_score + 1e-12 * std::abs(best_score) : score > best_score) {
                best_score = score;
                best = SplitChoice{f, 0.5 * (xi + xn), total_sq - score};
            }
        }
    }
    return best;
}

RegressionTree fit_tree(const SupervisedFrame& frame, const TreeOptions& options, Rng& rng,
                        const std::vector<int>& rows_in) {
    if (frame.rows() < 1) {
        throw std::invalid_argument("fit_tree: empty frame");
    }
    const auto n_features = static_cast<int>(frame.cols());
    const int mtry = std::clamp(options.mtry.value_or(n_features), 1, n_features);

    std::vector<int> root_rows = rows_in;
    if (root_rows.empty()) {
        root_rows.resize(static_cast<std::size_t>(frame.rows()));
        std::iota(root_rows.begin(), root_rows.end(), 0);
    }

    struct Pending {
        int node;
        int depth;
        std::vector<int> rows;
    };
    std::vector<TreeNode> nodes(1);
    std::vector<Pending> stack;
    stack.push_back({0, 0, std::move(root_rows)});
    std::vector<int> pool(static_cast<std::size_t>(n_features));

    while (!stack.empty()) {
        Pending job = std::move(stack.back());
        stack.pop_back();
        TreeNode& node = nodes[static_cast<std::size_t>(job.node)];
        double sum = 0.0;
        for (const int r : job.rows) sum += frame.targets[r];
        node.count = static_cast<int>(job.rows.size());
        node.value = sum / static_cast<double>(job.rows.size());

        const bool depth_capped = options.max_depth && job.depth >= *options.max_depth;
        if (node.count < options.min_split_size || depth_capped) {
            continue;
        }
        std::iota(pool.begin(), pool.end(), 0);
        std::vector<int> candidates;
        if (mtry < n_features) {
            for (int k = 0; k < mtry; ++k) {
                const auto j = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(n_features - k)));
                std::swap(pool[static_cast<std::size_t>(k)], pool[static_cast<std::size_t>(j)]);
            }
            candidates.assign(pool.begin(), pool.begin() + mtry);
        } else {
            candidates = pool;
        }
        const auto split = best_cart_split(frame.features, frame.targets, job.rows, candidates, options.min_node_size);
        if (!split) {
            continue;
        }
        std::vector<int> left_rows, right_rows;
        for (const int r : job.rows) {
            (frame.features(r, split->feature) <= split->threshold ? left_rows : right_rows).push_back(r);
        }
        const auto left = static_cast<int>(nodes.size());
        const int right = left + 1;
        node.feature = split->feature;
        node.threshold = split->threshold;
        node.left = left;
        node.right = right;
        nodes.emplace_back();
        nodes.emplace_back();
        stack.push_back({right, job.depth + 1, std::move(right_rows)});
        stack.push_back({left, job.depth + 1, std::move(left_rows)});
    }
    return RegressionTree(std::move(nodes));
}

// ---------------------------------------------------------------------------
// Forest
// ---------------------------------------------------------------------------

int default_mtry(int features) { return std::max(1, features / 3); }

ForestModel fit_forest(const SupervisedFrame& frame, std::uint64_t seed, const ForestOptions& options) {
    if (options.trees < 1) {
        throw std::invalid_argument("fit_forest: need at least one tree");
    }
    const auto n_features = static_cast<int>(frame.cols());
    const int mtry = std::clamp(options.mtry.value_or(default_mtry(n_features)), 1, n_features);
    TreeOptions tree_opts;
    tree_opts.mtry = mtry;
    tree_opts.min_node_size = options.min_node_size;
    tree_opts.min_split_size = 2 * options.min_node_size;

    const auto n_rows = static_cast<std::uint64_t>(frame.rows());
    std::vector<RegressionTree> trees(static_cast<std::size_t>(options.trees));
    auto build = [&](int t) {
        Rng rng(derive_seed(seed, "forest-tree", static_cast<std::uint64_t>(t)));
        std::vector<int> sample(static_cast<std::size_t>(n_rows));
        for (auto& r : sample) r = static_cast<int>(rng.below(n_rows));
        trees[static_cast<std::size_t>(t)] = fit_tree(frame, tree_opts, rng, sample);
    };

    const int workers = std::clamp(options.threads, 1, options.trees);
    if (workers == 1) {
        for (int t = 0; t < options.trees; ++t) build(t);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (int t = next++; t < options.trees; t = next++) build(t);
            });
        }
        for (auto& th : pool) th.join();
    }
    return ForestModel(std::move(trees), mtry);
}

// ---------------------------------------------------------------------------
// Boosting
// ---------------------------------------------------------------------------

namespace {

class BoostTreeBuilder {
public:
    BoostTreeBuilder(const Eigen::MatrixXd& x, const BoostOptions& opt) : x_(x), opt_(opt) {
        const auto n = static_cast<int>(x.rows());
        const auto f = static_cast<int>(x.cols());
        presorted_.resize(static_cast<std::size_t>(f));
        for (int j = 0; j < f; ++j) {
            auto& order = presorted_[static_cast<std::size_t>(j)];
            order.resize(static_cast<std::size_t>(n));
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return x(a, j) < x(b, j); });
        }
        goes_left_.resize(static_cast<std::size_t>(n));
    }

    RegressionTree build(const Eigen::VectorXd& grad, const Eigen::VectorXd& hess) {
        nodes_.assign(1, TreeNode{});
        grow(0, 0, presorted_, grad, hess);
        return RegressionTree(std::move(nodes_));
    }

private:
    using Lists = std::vector<std::vector<int>>;

    void grow(int node_id, int depth, const Lists& lists, const Eigen::VectorXd& g, const Eigen::VectorXd& h) {
        const auto& rows = lists.front();
        double G = 0.0, H = 0.0;
        for (const int r : rows) {
            G += g[r];
            H += h[r];
        }
        {
            TreeNode& node = nodes_[static_cast<std::size_t>(node_id)];
            node.count = static_cast<int>(rows.size());
            node.value = -G / (H + opt_.lambda_reg);
        }
        if (depth >= opt_.max_depth || rows.size() < 2) {
            return;
        }
        const double parent = G * G / (H + opt_.lambda_reg);
        double grad_sq = 0.0;
        for (const int r : rows) grad_sq += g[r] * g[r];
        const double tol = 1e-14 * std::max(grad_sq, 1e-300);

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_gain = tol;
        for (std::size_t f = 0; f < lists.size(); ++f) {
            const auto& order = lists[f];
            double GL = 0.0, HL = 0.0;
            for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                const int r = order[i];
                GL += g[r];
                HL += h[r];
                const double xi = x_(r, static_cast<Eigen::Index>(f));
                const double xn = x_(order[i + 1], static_cast<Eigen::Index>(f));
                if (xi == xn) {
                    continue;
                }
                const double GR = G - GL;
                const double HR = H - HL;
                if (HL < opt_.min_child_weight || HR < opt_.min_child_weight) {
                    continue;
                }
                const double gain =
                    0.5 * (GL * GL / (HL + opt_.lambda_reg) + GR * GR / (HR + opt_.lambda_reg) - parent);
                if (best_feature < 0 ? gain > best_gain : gain > best_gain + 1e-12 * std::abs(best_gain)) {
                    best_gain = gain;
                    best_feature = static_cast<int>(f);
                    best_threshold = 0.5 * (xi + xn);
                }
            }
        }
        if (best_feature < 0) {
            return;
        }
        for (const int r : rows) {
            goes_left_[static_cast<std::size_t>(r)] = x_(r, best_feature) <= best_threshold;
        }
        Lists left(lists.size()), right(lists.size());
        for (std::size_t f = 0; f < lists.size(); ++f) {
            left[f].reserve(lists[f].size());
            right[f].reserve(lists[f].size());
            for (const int r : lists[f]) {
                (goes_left_[static_cast<std::size_t>(r)] ? left[f] : right[f]).push_back(r);
            }
        }
        const auto left_id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        nodes_.emplace_back();
        TreeNode& node = nodes_[static_cast<std::size_t>(node_id)];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = left_id;
        node.right = left_id + 1;
        grow(left_id, depth + 1, left, g, h);
        grow(left_id + 1, depth + 1, right, g, h);
    }

    const Eigen::MatrixXd& x_;
    const BoostOptions& opt_;
    Lists presorted_;
    std::vector<char> goes_left_;
    std::vector<TreeNode> nodes_;
};

}  // namespace

BoostedModel fit_boosted(const SupervisedFrame& frame, [[maybe_unused]] std::uint64_t seed,
                         const BoostOptions& options) {
    if (frame.rows() < 1) {
        throw std::invalid_argument("fit_boosted: empty frame");
    }
    if (options.rounds < 0 || options.max_depth < 0 || options.lambda_reg < 0.0) {
        throw std::invalid_argument("fit_boosted: invalid options");
    }
    const Eigen::VectorXd& y = frame.targets;
    const double base = y.mean();
    Eigen::VectorXd fitted = Eigen::VectorXd::Constant(y.size(), base);
    const Eigen::VectorXd hess = Eigen::VectorXd::Ones(y.size());
    BoostTreeBuilder builder(frame.features, options);
    std::vector<RegressionTree> rounds;
    rounds.reserve(static_cast<std::size_t>(options.rounds));
    for (int k = 0; k < options.rounds; ++k) {
        const Eigen::VectorXd grad = fitted - y;
        RegressionTree tree = builder.build(grad, hess);
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            fitted[i] += options.learning_rate * tree.predict(frame.features.row(i));
        }
        rounds.push_back(std::move(tree));
    }
    return BoostedModel(base, options.learning_rate, std::move(rounds));
}

}  // namespace tsbench::ml
