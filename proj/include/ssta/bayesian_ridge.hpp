#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>

#include "ssta/errors.hpp"
#include "ssta/features.hpp"

namespace ssta {

// Evidence-maximization hyperpriors and iteration limits. With
// update_hyperparams = false the fit is a single closed-form ridge solve
// at the given precisions.
struct BayesianRidgeConfig {
    double alpha1 = 1e-6;  // Gamma hyperprior on the noise precision
    double alpha2 = 1e-6;
    double lambda1 = 1e-6;  // Gamma hyperprior on the weight precision
    double lambda2 = 1e-6;
    int max_iter = 300;
    double tol = 1e-3;  // max-abs weight change
    bool update_hyperparams = true;
    std::optional<double> init_alpha;   // default 1/var(y), 1 when var(y)=0
    std::optional<double> init_lambda;  // default 1
};

// Linear model with precisions estimated from the data. The posterior
// covariance is kept in factored form (eigenbasis of centered X'X) so the
// predictive standard deviation needs no refactorization.
struct BayesianRidgeModel {
    Eigen::VectorXd weights;
    double intercept = 0;
    double alpha = 0;   // noise precision
    double lambda = 0;  // weight precision
    int n_iterations_run = 0;
    bool converged = false;

    Eigen::MatrixXd eigvecs;          // d x d, columns = eigenbasis of centered X'X
    Eigen::VectorXd eigvals;          // d, non-negative
    Eigen::RowVectorXd feature_mean;  // centering offset used during the fit
    double target_mean = 0;

    Eigen::Index dim() const { return weights.size(); }
};

inline BayesianRidgeModel fit_bayesian_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                             const BayesianRidgeConfig& config = {}) {
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    if (n < 1) throw EmptyTraining();
    if (y.size() != n) throw ShapeError("target length does not match row count");
    if (!X.allFinite() || !y.allFinite()) throw NumericError("training data contains non-finite values");

    // Centered data; no feature scaling.
    Eigen::RowVectorXd x_mean = X.colwise().mean();
    Eigen::MatrixXd Xc = X.rowwise() - x_mean;
    const double y_mean = y.mean();
    Eigen::VectorXd yc = y.array() - y_mean;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Xc.transpose() * Xc);
    if (es.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
    Eigen::VectorXd s = es.eigenvalues().cwiseMax(0.0);
    const Eigen::MatrixXd& V = es.eigenvectors();
    Eigen::VectorXd proj = V.transpose() * (Xc.transpose() * yc);  // V' X' y

    const double var_y = yc.squaredNorm() / static_cast<double>(n);
    double alpha = config.init_alpha.value_or(var_y > 0 ? 1.0 / var_y : 1.0);
    double lambda = config.init_lambda.value_or(1.0);
    if (!(alpha > 0) || !(lambda > 0)) throw ConfigError("precisions must be positive");

    auto solve_weights = [&](double a, double l) -> Eigen::VectorXd {
        Eigen::VectorXd coef = (a * proj.array() / (a * s.array() + l)).matrix();
        return V * coef;
    };

    BayesianRidgeModel model;
    model.feature_mean = x_mean;
    model.target_mean = y_mean;

    if (!config.update_hyperparams) {
        model.weights = solve_weights(alpha, lambda);
        model.n_iterations_run = 1;
        model.converged = true;
    } else {
        Eigen::VectorXd w_old;
        for (int iter = 0; iter < config.max_iter; ++iter) {
            Eigen::VectorXd w = solve_weights(alpha, lambda);
            if (!w.allFinite()) throw NumericError("weights became non-finite");

            double gamma = (alpha * s.array() / (lambda + alpha * s.array())).sum();
            lambda = (gamma + 2.0 * config.lambda1) / (w.squaredNorm() + 2.0 * config.lambda2);
            double rss = (yc - Xc * w).squaredNorm();
            alpha = (static_cast<double>(n) - gamma + 2.0 * config.alpha1) /
                    (rss + 2.0 * config.alpha2);
            if (!std::isfinite(alpha) || !std::isfinite(lambda) || alpha <= 0 || lambda <= 0)
                throw NumericError("precision update became non-finite");

            model.n_iterations_run = iter + 1;
            if (iter > 0 && (w - w_old).cwiseAbs().maxCoeff() < config.tol) {
                model.converged = true;
                break;
            }
            w_old = w;
        }
        model.weights = solve_weights(alpha, lambda);
    }

    model.alpha = alpha;
    model.lambda = lambda;
    model.intercept = y_mean - x_mean * model.weights;
    model.eigvecs = V;
    model.eigvals = s;
    return model;
}

inline BayesianRidgeModel fit_bayesian_ridge(const FeatureMatrix& fm,
                                             const BayesianRidgeConfig& config = {}) {
    if (!fm.targets.allFinite()) throw DataError("feature matrix has rows without targets");
    return fit_bayesian_ridge(fm.values, fm.targets, config);
}

inline Eigen::VectorXd predict_bayesian_ridge(const BayesianRidgeModel& model,
                                              const Eigen::MatrixXd& X) {
    if (X.cols() != model.dim())
        throw ShapeError("feature dimension " + std::to_string(X.cols()) + " does not match model " +
                         std::to_string(model.dim()));
    return (X * model.weights).array() + model.intercept;
}

inline double predict_bayesian_ridge(const BayesianRidgeModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.dim()) throw ShapeError("feature dimension does not match model");
    return x.dot(model.weights) + model.intercept;
}

// Predictive mean and standard deviation; the variance is 1/alpha plus the
// posterior weight uncertainty along x.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> predict_bayesian_ridge_with_std(
    const BayesianRidgeModel& model, const Eigen::MatrixXd& X) {
    Eigen::VectorXd mean = predict_bayesian_ridge(model, X);
    Eigen::VectorXd inv =
        (model.alpha * model.eigvals.array() + model.lambda).inverse().matrix();
    Eigen::MatrixXd Z =
        (X.rowwise() - model.feature_mean) * model.eigvecs * inv.cwiseSqrt().asDiagonal();
    Eigen::VectorXd var = Z.rowwise().squaredNorm().array() + 1.0 / model.alpha;
    return {std::move(mean), var.cwiseSqrt()};
}

}  // namespace ssta
