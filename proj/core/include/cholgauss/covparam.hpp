#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <vector>

namespace cholgauss {

// Position of the strictly upper-triangular pair (i, j), 0-based with i < j,
// in a dense column-ordered vector: (0,1) (0,2) (1,2) (0,3) ...
[[nodiscard]] constexpr std::size_t offdiag_index(std::size_t i, std::size_t j) noexcept {
    return i + j * (j - 1) / 2;
}

[[nodiscard]] constexpr std::size_t offdiag_count(std::size_t k) noexcept {
    return k * (k - 1) / 2;
}

// Order-r antedependence structure: pairs with lag j - i > r are fixed at zero.
// An empty order means the unstructured (full) model.
class ADMask {
public:
    explicit ADMask(std::size_t dim, std::optional<std::size_t> order = std::nullopt);

    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::optional<std::size_t> order() const noexcept { return order_; }
    [[nodiscard]] bool active(std::size_t i, std::size_t j) const noexcept;
    [[nodiscard]] std::size_t active_count() const noexcept;
    [[nodiscard]] std::size_t masked_count() const noexcept;

    friend bool operator==(const ADMask&, const ADMask&) = default;

private:
    std::size_t dim_;
    std::optional<std::size_t> order_;
};

// Entries lambda of the inverse Cholesky factor, stored as the upper
// triangular matrix (L^{-1})^T: diag lambda_ii > 0, offdiag lambda_ij (i < j).
class InverseCholFactor {
public:
    // Throws invalid_parameter on a non-positive or non-finite diagonal entry.
    InverseCholFactor(Eigen::VectorXd diag, Eigen::VectorXd offdiag);
    InverseCholFactor(Eigen::VectorXd diag, Eigen::VectorXd offdiag, ADMask mask);

    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(diag_.size()); }
    [[nodiscard]] const Eigen::VectorXd& diag() const noexcept { return diag_; }
    [[nodiscard]] const Eigen::VectorXd& offdiag() const noexcept { return offdiag_; }
    [[nodiscard]] const ADMask& mask() const noexcept { return mask_; }

    // lambda_ij for i <= j; zero below the diagonal.
    [[nodiscard]] double at(std::size_t i, std::size_t j) const;
    // Upper triangular (L^{-1})^T.
    [[nodiscard]] Eigen::MatrixXd upper() const;
    // Lower triangular L^{-1}.
    [[nodiscard]] Eigen::MatrixXd inverse_factor() const { return upper().transpose(); }

private:
    Eigen::VectorXd diag_;
    Eigen::VectorXd offdiag_;
    ADMask mask_;
};

// Innovation variances psi and generalized autoregressive parameters phi with
// Sigma^{-1} = T^T D^{-1} T, D = diag(psi), T unit lower triangular with -phi_ij.
class ModifiedCholParams {
public:
    ModifiedCholParams(Eigen::VectorXd psi, Eigen::VectorXd phi);
    ModifiedCholParams(Eigen::VectorXd psi, Eigen::VectorXd phi, ADMask mask);

    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(psi_.size()); }
    [[nodiscard]] const Eigen::VectorXd& psi() const noexcept { return psi_; }
    [[nodiscard]] const Eigen::VectorXd& phi() const noexcept { return phi_; }
    [[nodiscard]] const ADMask& mask() const noexcept { return mask_; }

    // phi_ij for i < j, with the convention phi_ii = -1.
    [[nodiscard]] double phi_at(std::size_t i, std::size_t j) const;

private:
    Eigen::VectorXd psi_;
    Eigen::VectorXd phi_;
    ADMask mask_;
};

// Symmetric positive definite covariance with its precision and log determinant.
class CovarianceMatrix {
public:
    // Validates symmetry and positive definiteness. A minimum eigenvalue in
    // (-1e-10 * max eigenvalue, 0] is clamped; anything below is rejected.
    static CovarianceMatrix from_matrix(const Eigen::MatrixXd& sigma);

    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(sigma_.rows()); }
    [[nodiscard]] const Eigen::MatrixXd& matrix() const noexcept { return sigma_; }
    [[nodiscard]] const Eigen::MatrixXd& precision() const noexcept { return precision_; }
    [[nodiscard]] double precision_at(std::size_t i, std::size_t j) const { return precision_(i, j); }
    [[nodiscard]] double log_det() const noexcept { return log_det_; }
    // Lower Cholesky factor L with Sigma = L L^T.
    [[nodiscard]] const Eigen::MatrixXd& cholesky() const noexcept { return chol_; }
    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const { return sigma_(i, j); }

private:
    CovarianceMatrix() = default;

    // Used by the Cholesky-based constructors, which know every piece exactly.
    static CovarianceMatrix from_parts(Eigen::MatrixXd sigma, Eigen::MatrixXd precision,
                                       Eigen::MatrixXd chol, double log_det);
    friend CovarianceMatrix sigma_from_basic(const InverseCholFactor&);
    friend CovarianceMatrix sigma_from_modified(const ModifiedCholParams&);

    Eigen::MatrixXd sigma_;
    Eigen::MatrixXd precision_;
    Eigen::MatrixXd chol_;
    double log_det_ = 0.0;
};

struct VarianceCorrelation {
    Eigen::VectorXd variances;
    Eigen::MatrixXd correlation;
};

[[nodiscard]] CovarianceMatrix sigma_from_basic(const InverseCholFactor& factor);
[[nodiscard]] CovarianceMatrix sigma_from_modified(const ModifiedCholParams& params);
[[nodiscard]] InverseCholFactor modified_to_basic(const ModifiedCholParams& params);
[[nodiscard]] ModifiedCholParams basic_to_modified(const InverseCholFactor& factor);

// Sigma = diag(sds) P diag(sds) with P_ij = rho^|i-j|. Requires |rho| < 1.
[[nodiscard]] CovarianceMatrix sigma_from_ar1(const Eigen::VectorXd& sds, double rho);
// Sigma = diag(sds) corr diag(sds). corr must be a positive definite correlation matrix.
[[nodiscard]] CovarianceMatrix sigma_from_const_corr(const Eigen::VectorXd& sds,
                                                     const Eigen::MatrixXd& corr);

[[nodiscard]] VarianceCorrelation correlation_from_sigma(const CovarianceMatrix& sigma);

[[nodiscard]] InverseCholFactor apply_ad_mask(const InverseCholFactor& factor, const ADMask& mask);
[[nodiscard]] ModifiedCholParams apply_ad_mask(const ModifiedCholParams& params, const ADMask& mask);

}  // namespace cholgauss
