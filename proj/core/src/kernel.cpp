#include "cholgauss/kernel.hpp"

#include "cholgauss/errors.hpp"
#include "cholgauss/likelihood.hpp"

#include <cmath>
#include <limits>

namespace cholgauss {

FamilyKernel::FamilyKernel(std::shared_ptr<const ParamLayout> layout)
    : layout_(std::move(layout)), k_(layout_->dim()) {}

KernelWorkspace FamilyKernel::workspace() const {
    KernelWorkspace ws;
    ws.lambda.assign(k_ * k_, 0.0);
    ws.resid.assign(k_, 0.0);
    ws.z.assign(k_, 0.0);
    ws.eta.assign(layout_->size(), 0.0);
    ws.sigma = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k_), static_cast<Eigen::Index>(k_));
    ws.vec = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k_));
    return ws;
}

void FamilyKernel::load_cholesky(std::span<const double> eta, std::span<const double> y,
                                 KernelWorkspace& ws) const {
    const ParamLayout& l = *layout_;
    const std::size_t k = k_;
    double* lam = ws.lambda.data();
    for (std::size_t i = 0; i < k; ++i) ws.resid[i] = y[i] - eta[i];
    if (l.family() == Family::basic_chol) {
        for (std::size_t i = 0; i < k; ++i) lam[i * k + i] = std::exp(eta[k + i]);
        for (std::size_t p = 2 * k; p < l.size(); ++p) lam[l[p].i * k + l[p].j] = eta[p];
    } else {
        for (std::size_t i = 0; i < k; ++i) lam[i * k + i] = std::exp(-0.5 * eta[k + i]);
        for (std::size_t p = 2 * k; p < l.size(); ++p) {
            const std::size_t j = l[p].j;
            lam[l[p].i * k + j] = -eta[p] * lam[j * k + j];
        }
    }
}

double FamilyKernel::z_at(std::size_t j, KernelWorkspace& ws) const {
    const double* lam = ws.lambda.data();
    double s = 0.0;
    for (std::size_t m = 0; m <= j; ++m) s += ws.resid[m] * lam[m * k_ + j];
    return s;
}

bool FamilyKernel::assemble_reference(std::span<const double> eta, KernelWorkspace& ws) const {
    const ParamLayout& l = *layout_;
    const auto k = static_cast<Eigen::Index>(k_);
    Eigen::MatrixXd& s = ws.sigma;
    for (Eigen::Index i = 0; i < k; ++i) ws.vec[i] = std::exp(eta[k_ + static_cast<std::size_t>(i)]);
    if (l.family() == Family::ar1) {
        const double rho = k_ > 1 ? l[l.size() - 1].link.inverse(eta[l.size() - 1]) : 0.0;
        if (!(std::abs(rho) < 1.0)) return false;
        for (Eigen::Index i = 0; i < k; ++i) {
            double pw = 1.0;
            s(i, i) = ws.vec[i] * ws.vec[i];
            for (Eigen::Index j = i + 1; j < k; ++j) {
                pw *= rho;
                s(i, j) = s(j, i) = ws.vec[i] * ws.vec[j] * pw;
            }
        }
    } else {
        for (Eigen::Index i = 0; i < k; ++i) s(i, i) = ws.vec[i] * ws.vec[i];
        for (std::size_t p = 2 * k_; p < l.size(); ++p) {
            const auto i = static_cast<Eigen::Index>(l[p].i);
            const auto j = static_cast<Eigen::Index>(l[p].j);
            s(i, j) = s(j, i) = ws.vec[i] * ws.vec[j] * l[p].link.inverse(eta[p]);
        }
    }
    ws.llt.compute(s);
    return ws.llt.info() == Eigen::Success;
}

double FamilyKernel::reference_loglik(std::span<const double> eta, std::span<const double> y,
                                      KernelWorkspace& ws) const {
    if (!assemble_reference(eta, ws)) return -std::numeric_limits<double>::infinity();
    const auto k = static_cast<Eigen::Index>(k_);
    for (Eigen::Index i = 0; i < k; ++i) ws.vec[i] = y[static_cast<std::size_t>(i)] - eta[static_cast<std::size_t>(i)];
    const auto& lmat = ws.llt.matrixLLT();
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) log_det += std::log(lmat(i, i));
    ws.llt.matrixL().solveInPlace(ws.vec);
    const double val = -0.5 * static_cast<double>(k_) * log_two_pi - log_det - 0.5 * ws.vec.squaredNorm();
    return std::isfinite(val) ? val : -std::numeric_limits<double>::infinity();
}

double FamilyKernel::loglik(std::span<const double> eta, std::span<const double> y, KernelWorkspace& ws) const {
    const Family f = layout_->family();
    if (!is_cholesky(f)) return reference_loglik(eta, y, ws);
    load_cholesky(eta, y, ws);
    double quad = 0.0;
    for (std::size_t j = 0; j < k_; ++j) {
        const double zj = z_at(j, ws);
        quad += zj * zj;
    }
    double log_diag = 0.0;
    for (std::size_t i = 0; i < k_; ++i) log_diag += eta[k_ + i];
    if (f == Family::modified_chol) log_diag *= -0.5;
    return -0.5 * static_cast<double>(k_) * log_two_pi + log_diag - 0.5 * quad;
}

FamilyKernel::Coordinate FamilyKernel::coordinate(std::span<const double> eta, std::span<const double> y,
                                                  std::size_t p, KernelWorkspace& ws) const {
    const ParamLayout& l = *layout_;
    const DistParam& d = l[p];
    const std::size_t k = k_;
    const Family f = l.family();

    if (!is_cholesky(f)) {
        if (!assemble_reference(eta, ws)) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            return {nan, nan};
        }
        if (d.role == ParamRole::mean) {
            const auto kk = static_cast<Eigen::Index>(k);
            Eigen::VectorXd r(kk);
            for (Eigen::Index i = 0; i < kk; ++i) r[i] = y[static_cast<std::size_t>(i)] - eta[static_cast<std::size_t>(i)];
            const Eigen::VectorXd prec_r = ws.llt.solve(r);
            Eigen::VectorXd e = Eigen::VectorXd::Zero(kk);
            e[static_cast<Eigen::Index>(d.i)] = 1.0;
            ws.llt.matrixL().solveInPlace(e);
            return {prec_r[static_cast<Eigen::Index>(d.i)], -e.squaredNorm()};
        }
        ws.eta.assign(eta.begin(), eta.end());
        const double e0 = eta[p];
        const double h = fd_step(e0);
        auto at = [&](double v) {
            ws.eta[p] = v;
            return reference_loglik(ws.eta, y, ws);
        };
        const double f0 = at(e0);
        const double fp = at(e0 + h), fm = at(e0 - h);
        const double fp2 = at(e0 + 0.5 * h), fm2 = at(e0 - 0.5 * h);
        const double d1 = (4.0 * (fp2 - fm2) / h - (fp - fm) / (2.0 * h)) / 3.0;
        const double d2 = (4.0 * (fp2 - 2.0 * f0 + fm2) / (0.25 * h * h) - (fp - 2.0 * f0 + fm) / (h * h)) / 3.0;
        return {d1, d2};
    }

    load_cholesky(eta, y, ws);
    const double* lam = ws.lambda.data();
    const double* r = ws.resid.data();
    switch (d.role) {
        case ParamRole::mean: {
            double g = 0.0, h = 0.0;
            for (std::size_t j = d.i; j < k; ++j) {
                const double lij = lam[d.i * k + j];
                if (lij == 0.0) continue;
                g += lij * z_at(j, ws);
                h -= lij * lij;
            }
            return {g, h};
        }
        case ParamRole::chol_diag: {
            const double lii = lam[d.i * k + d.i];
            const double zi = z_at(d.i, ws);
            const double a = lii * r[d.i];
            return {1.0 - a * zi, -2.0 * a * a - a * (zi - a)};
        }
        case ParamRole::chol_offdiag: {
            const double zj = z_at(d.j, ws);
            return {-r[d.i] * zj, -r[d.i] * r[d.i]};
        }
        case ParamRole::innov_var: {
            const double zi = z_at(d.i, ws);
            return {0.5 * (zi * zi - 1.0), -0.5 * zi * zi};
        }
        case ParamRole::autoreg: {
            const double ljj = lam[d.j * k + d.j];
            const double zj = z_at(d.j, ws);
            return {r[d.i] * zj * ljj, -r[d.i] * r[d.i] * ljj * ljj};
        }
        default: break;
    }
    throw invalid_parameter("coordinate: unexpected parameter role");
}

}  // namespace cholgauss
