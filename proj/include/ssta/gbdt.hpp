#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "ssta/errors.hpp"
#include "ssta/rng.hpp"

namespace ssta {

struct GbdtConfig {
    int n_trees = 200;
    int max_depth = 6;
    double learning_rate = 0.05;
    int min_leaf = 20;
    double subsample = 1.0;  // row fraction per stage; the seed only matters below 1
    std::uint64_t seed = 0;
};

struct TreeNode {
    int feature = -1;  // -1 = leaf
    double threshold = 0;
    int left = -1;
    int right = -1;
    double value = 0;

    bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double predict_row(const Eigen::RowVectorXd& x) const {
        int at = 0;
        while (!nodes[static_cast<std::size_t>(at)].is_leaf()) {
            const TreeNode& nd = nodes[static_cast<std::size_t>(at)];
            at = (x(nd.feature) <= nd.threshold) ? nd.left : nd.right;
        }
        return nodes[static_cast<std::size_t>(at)].value;
    }
};

// Stagewise least-squares boosting over axis-aligned regression trees with
// greedy exact split search.
struct GbdtModel {
    std::vector<RegressionTree> trees;
    double learning_rate = 0.05;
    double init_prediction = 0;  // target mean
    Eigen::Index n_features = 0;
    std::vector<double> stage_mse;  // training MSE after each appended tree
};

namespace detail {

struct TreeBuilder {
    const Eigen::MatrixXd& X;
    const Eigen::VectorXd& residual;
    int max_depth;
    int min_leaf;
    RegressionTree tree;

    int build(std::vector<int>& idx, int lo, int hi, int depth) {
        const int n = hi - lo;
        double sum = 0;
        for (int k = lo; k < hi; ++k) sum += residual(idx[static_cast<std::size_t>(k)]);
        const double mean = sum / n;

        int best_feature = -1;
        double best_threshold = 0;
        double best_score = sum * sum / n;  // score of not splitting
        if (depth < max_depth && n >= 2 * min_leaf) {
            std::vector<int> order(idx.begin() + lo, idx.begin() + hi);
            for (Eigen::Index f = 0; f < X.cols(); ++f) {
                std::sort(order.begin(), order.end(), [&](int a, int b) {
                    double xa = X(a, f), xb = X(b, f);
                    if (xa != xb) return xa < xb;
                    return a < b;
                });
                double left_sum = 0;
                for (int k = 0; k + 1 < n; ++k) {
                    left_sum += residual(order[static_cast<std::size_t>(k)]);
                    const int nl = k + 1, nr = n - nl;
                    if (nl < min_leaf || nr < min_leaf) continue;
                    double xk = X(order[static_cast<std::size_t>(k)], f);
                    double xk1 = X(order[static_cast<std::size_t>(k + 1)], f);
                    if (xk == xk1) continue;  // cannot separate equal values
                    double right_sum = sum - left_sum;
                    double score = left_sum * left_sum / nl + right_sum * right_sum / nr;
                    if (score > best_score + 1e-12) {
                        best_score = score;
                        best_feature = static_cast<int>(f);
                        best_threshold = 0.5 * (xk + xk1);
                    }
                }
            }
        }

        int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        if (best_feature < 0) {
            tree.nodes[static_cast<std::size_t>(node_id)].value = mean;
            return node_id;
        }

        auto mid_it = std::partition(idx.begin() + lo, idx.begin() + hi, [&](int a) {
            return X(a, best_feature) <= best_threshold;
        });
        int mid = static_cast<int>(mid_it - idx.begin());
        int left = build(idx, lo, mid, depth + 1);
        int right = build(idx, mid, hi, depth + 1);
        TreeNode& nd = tree.nodes[static_cast<std::size_t>(node_id)];
        nd.feature = best_feature;
        nd.threshold = best_threshold;
        nd.left = left;
        nd.right = right;
        return node_id;
    }
};

}  // namespace detail

inline GbdtModel fit_gbdt(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const GbdtConfig& config = {}) {
    const Eigen::Index n = X.rows();
    if (n < 1) throw EmptyTraining();
    if (y.size() != n) throw ShapeError("target length does not match row count");
    if (!X.allFinite() || !y.allFinite()) throw NumericError("training data contains non-finite values");
    if (config.n_trees < 0 || config.max_depth < 1 || config.min_leaf < 1 ||
        !(config.learning_rate > 0) || !(config.subsample > 0) || config.subsample > 1)
        throw ConfigError("invalid boosting configuration");

    GbdtModel model;
    model.learning_rate = config.learning_rate;
    model.init_prediction = y.mean();
    model.n_features = X.cols();

    Eigen::VectorXd pred = Eigen::VectorXd::Constant(n, model.init_prediction);
    Eigen::VectorXd residual = y - pred;
    Rng rng(config.seed);

    const std::size_t sample_n =
        std::max<std::size_t>(1, static_cast<std::size_t>(config.subsample * static_cast<double>(n)));
    for (int stage = 0; stage < config.n_trees; ++stage) {
        if (residual.squaredNorm() == 0.0) break;  // nothing left to fit

        std::vector<int> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), 0);
        if (sample_n < idx.size()) {
            rng.shuffle(idx);
            idx.resize(sample_n);
            std::sort(idx.begin(), idx.end());
        }

        detail::TreeBuilder builder{X, residual, config.max_depth, config.min_leaf, {}};
        builder.build(idx, 0, static_cast<int>(idx.size()), 0);
        model.trees.push_back(std::move(builder.tree));

        const RegressionTree& tree = model.trees.back();
        for (Eigen::Index i = 0; i < n; ++i) {
            pred(i) += config.learning_rate * tree.predict_row(X.row(i));
            residual(i) = y(i) - pred(i);
        }
        model.stage_mse.push_back(residual.squaredNorm() / static_cast<double>(n));
    }
    return model;
}

inline Eigen::VectorXd predict_gbdt(const GbdtModel& model, const Eigen::MatrixXd& X) {
    if (X.cols() != model.n_features)
        throw ShapeError("feature dimension " + std::to_string(X.cols()) + " does not match model " +
                         std::to_string(model.n_features));
    Eigen::VectorXd out = Eigen::VectorXd::Constant(X.rows(), model.init_prediction);
    for (const auto& tree : model.trees)
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            out(i) += model.learning_rate * tree.predict_row(X.row(i));
    return out;
}

}  // namespace ssta
