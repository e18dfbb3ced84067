#include "cholgauss/covparam.hpp"

#include "cholgauss/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cholgauss {

namespace {

void check_offdiag_size(std::size_t k, const Eigen::VectorXd& offdiag) {
    if (static_cast<std::size_t>(offdiag.size()) != offdiag_count(k)) {
        throw invalid_parameter("expected " + std::to_string(offdiag_count(k)) +
                                " off-diagonal entries for dimension " + std::to_string(k) + ", got " +
                                std::to_string(offdiag.size()));
    }
}

void check_positive(const Eigen::VectorXd& v, const char* what) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0) || !std::isfinite(v[i])) {
            throw invalid_parameter(std::string(what) + "[" + std::to_string(i + 1) +
                                    "] must be positive and finite");
        }
    }
}

void check_finite(const Eigen::VectorXd& v, const char* what) {
    if (!v.allFinite()) {
        throw invalid_parameter(std::string(what) + " entries must be finite");
    }
}

// Zero out masked entries so structural zeros hold whatever was passed in.
Eigen::VectorXd masked(Eigen::VectorXd offdiag, const ADMask& mask) {
    const std::size_t k = mask.dim();
    for (std::size_t j = 1; j < k; ++j) {
        for (std::size_t i = 0; i < j; ++i) {
            if (!mask.active(i, j)) offdiag[offdiag_index(i, j)] = 0.0;
        }
    }
    return offdiag;
}

}  // namespace

ADMask::ADMask(std::size_t dim, std::optional<std::size_t> order) : dim_(dim), order_(order) {
    if (order_ && dim_ > 0 && *order_ >= dim_ - 1) order_.reset();
}

bool ADMask::active(std::size_t i, std::size_t j) const noexcept {
    if (i >= j || j >= dim_) return false;
    return !order_ || j - i <= *order_;
}

std::size_t ADMask::active_count() const noexcept {
    if (!order_) return offdiag_count(dim_);
    std::size_t n = 0;
    for (std::size_t lag = 1; lag <= *order_ && lag < dim_; ++lag) n += dim_ - lag;
    return n;
}

std::size_t ADMask::masked_count() const noexcept { return offdiag_count(dim_) - active_count(); }

InverseCholFactor::InverseCholFactor(Eigen::VectorXd diag, Eigen::VectorXd offdiag)
    : InverseCholFactor(std::move(diag), std::move(offdiag), ADMask(0)) {}

InverseCholFactor::InverseCholFactor(Eigen::VectorXd diag, Eigen::VectorXd offdiag, ADMask mask)
    : diag_(std::move(diag)), offdiag_(std::move(offdiag)), mask_(mask) {
    const auto k = static_cast<std::size_t>(diag_.size());
    if (mask_.dim() == 0 && k != 0) mask_ = ADMask(k);
    if (mask_.dim() != k) throw invalid_parameter("mask dimension does not match factor dimension");
    check_offdiag_size(k, offdiag_);
    check_positive(diag_, "lambda diagonal");
    check_finite(offdiag_, "lambda off-diagonal");
    offdiag_ = masked(std::move(offdiag_), mask_);
}

double InverseCholFactor::at(std::size_t i, std::size_t j) const {
    if (i == j) return diag_[static_cast<Eigen::Index>(i)];
    if (i > j) return 0.0;
    return offdiag_[static_cast<Eigen::Index>(offdiag_index(i, j))];
}

Eigen::MatrixXd InverseCholFactor::upper() const {
    const auto k = static_cast<Eigen::Index>(dim());
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index j = 0; j < k; ++j) {
        u(j, j) = diag_[j];
        for (Eigen::Index i = 0; i < j; ++i) {
            u(i, j) = offdiag_[static_cast<Eigen::Index>(offdiag_index(i, j))];
        }
    }
    return u;
}

ModifiedCholParams::ModifiedCholParams(Eigen::VectorXd psi, Eigen::VectorXd phi)
    : ModifiedCholParams(std::move(psi), std::move(phi), ADMask(0)) {}

ModifiedCholParams::ModifiedCholParams(Eigen::VectorXd psi, Eigen::VectorXd phi, ADMask mask)
    : psi_(std::move(psi)), phi_(std::move(phi)), mask_(mask) {
    const auto k = static_cast<std::size_t>(psi_.size());
    if (mask_.dim() == 0 && k != 0) mask_ = ADMask(k);
    if (mask_.dim() != k) throw invalid_parameter("mask dimension does not match parameter dimension");
    check_offdiag_size(k, phi_);
    check_positive(psi_, "psi");
    check_finite(phi_, "phi");
    phi_ = masked(std::move(phi_), mask_);
}

double ModifiedCholParams::phi_at(std::size_t i, std::size_t j) const {
    if (i == j) return -1.0;
    if (i > j) return 0.0;
    return phi_[static_cast<Eigen::Index>(offdiag_index(i, j))];
}

CovarianceMatrix CovarianceMatrix::from_parts(Eigen::MatrixXd sigma, Eigen::MatrixXd precision,
                                              Eigen::MatrixXd chol, double log_det) {
    CovarianceMatrix out;
    out.sigma_ = std::move(sigma);
    out.precision_ = std::move(precision);
    out.chol_ = std::move(chol);
    out.log_det_ = log_det;
    if (!out.sigma_.allFinite() || !std::isfinite(log_det)) {
        throw numerical_failure("covariance assembly produced non-finite entries");
    }
    return out;
}

CovarianceMatrix CovarianceMatrix::from_matrix(const Eigen::MatrixXd& sigma) {
    if (sigma.rows() != sigma.cols() || sigma.rows() == 0) {
        throw invalid_parameter("covariance must be a non-empty square matrix");
    }
    if (!sigma.allFinite()) throw invalid_parameter("covariance entries must be finite");
    const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw invalid_parameter("covariance matrix is not symmetric");
    }
    Eigen::MatrixXd sym = 0.5 * (sigma + sigma.transpose());

    Eigen::LLT<Eigen::MatrixXd> llt(sym);
    if (llt.info() != Eigen::Success) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
        const double lo = eig.eigenvalues().minCoeff();
        const double hi = eig.eigenvalues().maxCoeff();
        if (!(hi > 0.0) || lo <= -1e-10 * hi) {
            throw invalid_parameter("covariance matrix is not positive definite (min eigenvalue " +
                                    std::to_string(lo) + ")");
        }
        Eigen::VectorXd clamped = eig.eigenvalues().cwiseMax(1e-10 * hi);
        sym = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
        sym = 0.5 * (sym + sym.transpose());
        llt.compute(sym);
        if (llt.info() != Eigen::Success) throw numerical_failure("Cholesky factorization failed after clamp");
    }

    CovarianceMatrix out;
    out.chol_ = llt.matrixL();
    out.log_det_ = 2.0 * out.chol_.diagonal().array().log().sum();
    out.precision_ = llt.solve(Eigen::MatrixXd::Identity(sym.rows(), sym.cols()));
    out.precision_ = 0.5 * (out.precision_ + out.precision_.transpose());
    out.sigma_ = std::move(sym);
    return out;
}

CovarianceMatrix sigma_from_basic(const InverseCholFactor& factor) {
    const Eigen::MatrixXd u = factor.upper();  // (L^{-1})^T
    const auto k = u.rows();
    // U^{-1} by back-substitution; L = (U^{-1})^T is the lower Cholesky factor of Sigma.
    const Eigen::MatrixXd u_inv =
        u.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
    Eigen::MatrixXd chol = u_inv.transpose();
    Eigen::MatrixXd sigma = chol * chol.transpose();
    Eigen::MatrixXd precision = u * u.transpose();
    const double log_det = -2.0 * factor.diag().array().log().sum();
    return CovarianceMatrix::from_parts(std::move(sigma), std::move(precision), std::move(chol), log_det);
}

CovarianceMatrix sigma_from_modified(const ModifiedCholParams& params) {
    const auto k = static_cast<Eigen::Index>(params.dim());
    Eigen::MatrixXd t = Eigen::MatrixXd::Identity(k, k);
    for (Eigen::Index j = 1; j < k; ++j) {
        for (Eigen::Index i = 0; i < j; ++i) {
            t(j, i) = -params.phi_at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        }
    }
    const Eigen::VectorXd& psi = params.psi();
    // Sigma = T^{-1} D T^{-T}; T^{-1} D^{1/2} is its Cholesky factor.
    const Eigen::MatrixXd t_inv =
        t.triangularView<Eigen::UnitLower>().solve(Eigen::MatrixXd::Identity(k, k));
    Eigen::MatrixXd chol = t_inv * psi.cwiseSqrt().asDiagonal();
    Eigen::MatrixXd sigma = chol * chol.transpose();
    Eigen::MatrixXd precision = t.transpose() * psi.cwiseInverse().asDiagonal() * t;
    const double log_det = psi.array().log().sum();
    return CovarianceMatrix::from_parts(std::move(sigma), std::move(precision), std::move(chol), log_det);
}

InverseCholFactor modified_to_basic(const ModifiedCholParams& params) {
    const std::size_t k = params.dim();
    Eigen::VectorXd diag = params.psi().cwiseSqrt().cwiseInverse();
    Eigen::VectorXd offdiag(static_cast<Eigen::Index>(offdiag_count(k)));
    for (std::size_t j = 1; j < k; ++j) {
        for (std::size_t i = 0; i < j; ++i) {
            offdiag[static_cast<Eigen::Index>(offdiag_index(i, j))] =
                -params.phi_at(i, j) * diag[static_cast<Eigen::Index>(j)];
        }
    }
    return {std::move(diag), std::move(offdiag), params.mask()};
}

ModifiedCholParams basic_to_modified(const InverseCholFactor& factor) {
    const std::size_t k = factor.dim();
    Eigen::VectorXd psi = factor.diag().array().square().inverse();
    Eigen::VectorXd phi(static_cast<Eigen::Index>(offdiag_count(k)));
    for (std::size_t j = 1; j < k; ++j) {
        for (std::size_t i = 0; i < j; ++i) {
            phi[static_cast<Eigen::Index>(offdiag_index(i, j))] =
                -factor.at(i, j) / factor.diag()[static_cast<Eigen::Index>(j)];
        }
    }
    return {std::move(psi), std::move(phi), factor.mask()};
}

CovarianceMatrix sigma_from_ar1(const Eigen::VectorXd& sds, double rho) {
    if (!(std::abs(rho) < 1.0)) throw invalid_parameter("AR1 correlation must satisfy |rho| < 1");
    check_positive(sds, "sd");
    const auto k = sds.size();
    Eigen::MatrixXd sigma(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
            sigma(i, j) = sds[i] * sds[j] * std::pow(rho, static_cast<double>(std::abs(i - j)));
        }
    }
    return CovarianceMatrix::from_matrix(sigma);
}

CovarianceMatrix sigma_from_const_corr(const Eigen::VectorXd& sds, const Eigen::MatrixXd& corr) {
    check_positive(sds, "sd");
    const auto k = sds.size();
    if (corr.rows() != k || corr.cols() != k) throw invalid_parameter("correlation matrix has wrong shape");
    for (Eigen::Index i = 0; i < k; ++i) {
        if (std::abs(corr(i, i) - 1.0) > 1e-12) throw invalid_parameter("correlation diagonal must be 1");
    }
    return CovarianceMatrix::from_matrix(sds.asDiagonal() * corr * sds.asDiagonal());
}

VarianceCorrelation correlation_from_sigma(const CovarianceMatrix& sigma) {
    const Eigen::MatrixXd& s = sigma.matrix();
    Eigen::VectorXd var = s.diagonal();
    Eigen::VectorXd inv_sd = var.cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd corr = inv_sd.asDiagonal() * s * inv_sd.asDiagonal();
    corr.diagonal().setOnes();
    return {std::move(var), std::move(corr)};
}

InverseCholFactor apply_ad_mask(const InverseCholFactor& factor, const ADMask& mask) {
    if (mask.dim() != factor.dim()) throw invalid_parameter("mask dimension mismatch");
    return {factor.diag(), factor.offdiag(), mask};
}

ModifiedCholParams apply_ad_mask(const ModifiedCholParams& params, const ADMask& mask) {
    if (mask.dim() != params.dim()) throw invalid_parameter("mask dimension mismatch");
    return {params.psi(), params.phi(), mask};
}

}  // namespace cholgauss
