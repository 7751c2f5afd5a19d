#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "ssta/errors.hpp"
#include "ssta/features.hpp"
#include "ssta/rng.hpp"

namespace ssta {

inline constexpr int kSeasonClasses = 12;

struct MlpConfig {
    int hidden = 64;
    int epochs = 200;
    double learning_rate = 0.05;
    int batch_size = 32;
    std::uint64_t seed = 0;
};

// One hidden tanh layer, 12-way softmax output (one class per calendar
// month).
struct MlpModel {
    Eigen::MatrixXd w1;  // hidden x in
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;  // 12 x hidden
    Eigen::VectorXd b2;
    std::vector<double> loss_trace;  // mean cross-entropy per epoch

    Eigen::Index in_dim() const { return w1.cols(); }
    Eigen::Index hidden_dim() const { return w1.rows(); }
};

inline Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    Eigen::VectorXd z = (logits.array() - logits.maxCoeff()).exp();
    return z / z.sum();
}

inline Eigen::VectorXd mlp_probabilities(const MlpModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.in_dim()) throw ShapeError("input dimension does not match the classifier");
    Eigen::VectorXd h = (model.w1 * x + model.b1).array().tanh();
    return softmax(model.w2 * h + model.b2);
}

// Season as a calendar month in [1, 12]; ties break toward the lowest
// month.
inline int predict_season(const MlpModel& model, const Eigen::VectorXd& normalized_row) {
    Eigen::VectorXd p = mlp_probabilities(model, normalized_row);
    int best = 0;
    for (int k = 1; k < kSeasonClasses; ++k)
        if (p(k) > p(best)) best = k;
    return best + 1;
}

struct MlpGradients {
    Eigen::MatrixXd w1;
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;
    Eigen::VectorXd b2;
};

// Mean cross-entropy over the batch and its analytic gradient.
inline double mlp_loss_and_gradient(const MlpModel& model, const Eigen::MatrixXd& X,
                                    const std::vector<int>& labels, MlpGradients* grad) {
    const Eigen::Index n = X.rows();
    if (static_cast<Eigen::Index>(labels.size()) != n)
        throw ShapeError("label count does not match rows");
    if (grad) {
        grad->w1 = Eigen::MatrixXd::Zero(model.w1.rows(), model.w1.cols());
        grad->b1 = Eigen::VectorXd::Zero(model.b1.size());
        grad->w2 = Eigen::MatrixXd::Zero(model.w2.rows(), model.w2.cols());
        grad->b2 = Eigen::VectorXd::Zero(model.b2.size());
    }
    double loss = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd x = X.row(i).transpose();
        Eigen::VectorXd h = (model.w1 * x + model.b1).array().tanh();
        Eigen::VectorXd p = softmax(model.w2 * h + model.b2);
        int label = labels[static_cast<std::size_t>(i)];
        loss -= std::log(std::max(p(label), 1e-300));
        if (grad) {
            Eigen::VectorXd dlogits = p;
            dlogits(label) -= 1.0;
            grad->w2 += dlogits * h.transpose();
            grad->b2 += dlogits;
            Eigen::VectorXd dh = model.w2.transpose() * dlogits;
            Eigen::VectorXd da = dh.array() * (1.0 - h.array().square());
            grad->w1 += da * x.transpose();
            grad->b1 += da;
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    if (grad) {
        grad->w1 *= inv_n;
        grad->b1 *= inv_n;
        grad->w2 *= inv_n;
        grad->b2 *= inv_n;
    }
    return loss * inv_n;
}

inline Eigen::VectorXd mlp_flatten(const MlpModel& model) {
    Eigen::Index total = model.w1.size() + model.b1.size() + model.w2.size() + model.b2.size();
    Eigen::VectorXd out(total);
    Eigen::Index at = 0;
    auto put = [&](const auto& m) {
        out.segment(at, m.size()) = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
        at += m.size();
    };
    put(model.w1);
    put(model.b1);
    put(model.w2);
    put(model.b2);
    return out;
}

inline void mlp_unflatten(MlpModel& model, const Eigen::VectorXd& params) {
    Eigen::Index at = 0;
    auto take = [&](auto& m) {
        Eigen::Map<Eigen::VectorXd>(m.data(), m.size()) = params.segment(at, m.size());
        at += m.size();
    };
    take(model.w1);
    take(model.b1);
    take(model.w2);
    take(model.b2);
    if (at != params.size()) throw ShapeError("parameter vector size mismatch");
}

inline MlpModel make_mlp(Eigen::Index in_dim, int hidden, Rng& rng) {
    MlpModel model;
    model.w1.resize(hidden, in_dim);
    model.b1 = Eigen::VectorXd::Zero(hidden);
    model.w2.resize(kSeasonClasses, hidden);
    model.b2 = Eigen::VectorXd::Zero(kSeasonClasses);
    const double lim1 = std::sqrt(6.0 / static_cast<double>(in_dim + hidden));
    const double lim2 = std::sqrt(6.0 / static_cast<double>(hidden + kSeasonClasses));
    for (Eigen::Index j = 0; j < model.w1.cols(); ++j)
        for (Eigen::Index i = 0; i < model.w1.rows(); ++i) model.w1(i, j) = rng.uniform(-lim1, lim1);
    for (Eigen::Index j = 0; j < model.w2.cols(); ++j)
        for (Eigen::Index i = 0; i < model.w2.rows(); ++i) model.w2(i, j) = rng.uniform(-lim2, lim2);
    return model;
}

// Mini-batch gradient descent on the cross-entropy; fully determined by
// (data, config).
inline MlpModel fit_mlp_classifier(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                                   const MlpConfig& config = {}) {
    const Eigen::Index n = X.rows();
    if (n < 1) throw EmptyTraining();
    if (static_cast<Eigen::Index>(labels.size()) != n)
        throw ShapeError("label count does not match rows");
    {
        std::vector<bool> seen(kSeasonClasses, false);
        int distinct = 0;
        for (int lb : labels) {
            if (lb < 0 || lb >= kSeasonClasses)
                throw DataError("label " + std::to_string(lb) + " outside [0, 12)");
            if (!seen[static_cast<std::size_t>(lb)]) {
                seen[static_cast<std::size_t>(lb)] = true;
                ++distinct;
            }
        }
        if (distinct < 2) throw DataError("training needs at least 2 distinct labels");
    }
    if (config.hidden < 1 || config.epochs < 1 || config.batch_size < 1 ||
        !(config.learning_rate > 0))
        throw ConfigError("invalid MLP configuration");

    Rng rng(config.seed);
    MlpModel model = make_mlp(X.cols(), config.hidden, rng);

    std::vector<std::size_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    MlpGradients grad;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0;
        for (std::size_t at = 0; at < order.size(); at += static_cast<std::size_t>(config.batch_size)) {
            std::size_t bn = std::min(order.size() - at, static_cast<std::size_t>(config.batch_size));
            Eigen::MatrixXd bx(bn, X.cols());
            std::vector<int> by(bn);
            for (std::size_t k = 0; k < bn; ++k) {
                bx.row(static_cast<Eigen::Index>(k)) = X.row(static_cast<Eigen::Index>(order[at + k]));
                by[k] = labels[order[at + k]];
            }
            double batch_loss = mlp_loss_and_gradient(model, bx, by, &grad);
            epoch_loss += batch_loss * static_cast<double>(bn);
            model.w1 -= config.learning_rate * grad.w1;
            model.b1 -= config.learning_rate * grad.b1;
            model.w2 -= config.learning_rate * grad.w2;
            model.b2 -= config.learning_rate * grad.b2;
        }
        epoch_loss /= static_cast<double>(n);
        if (!std::isfinite(epoch_loss)) throw DivergenceError(epoch);
        model.loss_trace.push_back(epoch_loss);
    }
    return model;
}

inline MlpModel fit_mlp_classifier(const SeasonalDataset& data, const MlpConfig& config = {}) {
    return fit_mlp_classifier(data.rows, data.labels, config);
}

}  // namespace ssta
