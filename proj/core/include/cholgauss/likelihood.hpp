#pragma once

#include "cholgauss/covparam.hpp"
#include "cholgauss/layout.hpp"

#include <Eigen/Dense>

#include <memory>

namespace cholgauss {

inline constexpr double log_two_pi = 1.8378770664093454835606594728112;

// Link-scale predictor values for one observation, in ParamLayout order.
// Structural zeros are not part of the bundle.
struct PredictorBundle {
    std::shared_ptr<const ParamLayout> layout;
    Eigen::VectorXd eta;

    PredictorBundle(std::shared_ptr<const ParamLayout> l, Eigen::VectorXd e);

    [[nodiscard]] Family family() const noexcept { return layout->family(); }
    [[nodiscard]] std::size_t dim() const noexcept { return layout->dim(); }
};

// First and diagonal second derivatives of the log-likelihood with respect
// to every predictor coordinate, plus the working quantities they were built from.
struct DerivativeBundle {
    Eigen::VectorXd first;
    Eigen::VectorXd second;
    Eigen::VectorXd residual;  // y - mu
    Eigen::VectorXd z;         // L^{-1} (y - mu), Cholesky families only
};

[[nodiscard]] Eigen::VectorXd mean_of(const PredictorBundle& bundle);
// Cholesky-family parameter views. basic_factor converts a modified bundle
// and vice versa.
[[nodiscard]] InverseCholFactor basic_factor(const PredictorBundle& bundle);
[[nodiscard]] ModifiedCholParams modified_params(const PredictorBundle& bundle);
// Sigma for any family. Throws invalid_parameter for a non-PD constant correlation.
[[nodiscard]] CovarianceMatrix covariance_of(const PredictorBundle& bundle);

// Re-express a Cholesky-family bundle in the other Cholesky family.
[[nodiscard]] PredictorBundle to_modified_bundle(const PredictorBundle& basic);
[[nodiscard]] PredictorBundle to_basic_bundle(const PredictorBundle& modified);

[[nodiscard]] double loglik_basic(const PredictorBundle& bundle, const Eigen::VectorXd& y);
[[nodiscard]] double loglik_modified(const PredictorBundle& bundle, const Eigen::VectorXd& y);
// Dense reference: log-determinant and linear solve on Sigma.
[[nodiscard]] double loglik_generic(const Eigen::VectorXd& mu, const CovarianceMatrix& sigma,
                                    const Eigen::VectorXd& y);
// Family dispatch; reference families go through loglik_generic.
[[nodiscard]] double loglik(const PredictorBundle& bundle, const Eigen::VectorXd& y);

[[nodiscard]] DerivativeBundle grad_basic(const PredictorBundle& bundle, const Eigen::VectorXd& y);
[[nodiscard]] DerivativeBundle hess_diag_basic(const PredictorBundle& bundle, const Eigen::VectorXd& y);
[[nodiscard]] DerivativeBundle grad_modified(const PredictorBundle& bundle, const Eigen::VectorXd& y);
[[nodiscard]] DerivativeBundle hess_diag_modified(const PredictorBundle& bundle, const Eigen::VectorXd& y);

// Derivatives for the AR1 and constant-correlation families. Mean coordinates
// are analytic; sd and correlation coordinates use central differences of
// loglik_generic with one Richardson level.
// Throws invalid_parameter if Sigma cannot be assembled at the base point.
[[nodiscard]] DerivativeBundle grad_reference(const PredictorBundle& bundle, const Eigen::VectorXd& y);

// Central-difference step used for predictor coordinates.
[[nodiscard]] double fd_step(double eta) noexcept;

}  // namespace cholgauss
