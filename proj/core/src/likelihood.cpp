#include "cholgauss/likelihood.hpp"

#include "cholgauss/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cholgauss {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

void require_family(const PredictorBundle& b, Family f, const char* fn) {
    if (b.family() != f) {
        throw invalid_parameter(std::string(fn) + ": bundle has family " + std::string(to_string(b.family())));
    }
}

// Pair-parameter values in dense offdiag_index order with structural zeros filled in.
Eigen::VectorXd dense_pairs(const PredictorBundle& b, bool apply_link) {
    const ParamLayout& layout = *b.layout;
    const std::size_t k = layout.dim();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(idx(offdiag_count(k)));
    for (std::size_t j = 1; j < k; ++j) {
        for (std::size_t i = 0; i < j; ++i) {
            if (auto p = layout.pair_position(i, j)) {
                const double eta = b.eta[idx(*p)];
                out[idx(offdiag_index(i, j))] = apply_link ? layout[*p].link.inverse(eta) : eta;
            }
        }
    }
    return out;
}

Eigen::VectorXd diag_values(const PredictorBundle& b) {
    const std::size_t k = b.dim();
    Eigen::VectorXd out(idx(k));
    for (std::size_t i = 0; i < k; ++i) out[idx(i)] = std::exp(b.eta[idx(b.layout->diag_position(i))]);
    return out;
}

}  // namespace

PredictorBundle::PredictorBundle(std::shared_ptr<const ParamLayout> l, Eigen::VectorXd e)
    : layout(std::move(l)), eta(std::move(e)) {
    if (!layout) throw invalid_parameter("predictor bundle requires a layout");
    if (static_cast<std::size_t>(eta.size()) != layout->size()) {
        throw invalid_parameter("predictor bundle has " + std::to_string(eta.size()) + " values, layout expects " +
                                std::to_string(layout->size()));
    }
}

double fd_step(double eta) noexcept { return std::max(1e-5, 1e-7 * std::abs(eta)); }

Eigen::VectorXd mean_of(const PredictorBundle& bundle) { return bundle.eta.head(idx(bundle.dim())); }

InverseCholFactor basic_factor(const PredictorBundle& bundle) {
    switch (bundle.family()) {
        case Family::basic_chol:
            return {diag_values(bundle), dense_pairs(bundle, true), bundle.layout->mask()};
        case Family::modified_chol:
            return modified_to_basic(modified_params(bundle));
        default:
            throw invalid_parameter("basic_factor requires a Cholesky family");
    }
}

ModifiedCholParams modified_params(const PredictorBundle& bundle) {
    switch (bundle.family()) {
        case Family::modified_chol:
            return {diag_values(bundle), dense_pairs(bundle, true), bundle.layout->mask()};
        case Family::basic_chol:
            return basic_to_modified(basic_factor(bundle));
        default:
            throw invalid_parameter("modified_params requires a Cholesky family");
    }
}

CovarianceMatrix covariance_of(const PredictorBundle& bundle) {
    const ParamLayout& layout = *bundle.layout;
    const std::size_t k = layout.dim();
    switch (bundle.family()) {
        case Family::basic_chol: return sigma_from_basic(basic_factor(bundle));
        case Family::modified_chol: return sigma_from_modified(modified_params(bundle));
        case Family::ar1: {
            const Eigen::VectorXd sds = diag_values(bundle);
            const double rho = k > 1 ? layout[layout.size() - 1].link.inverse(bundle.eta[idx(layout.size() - 1)]) : 0.0;
            return sigma_from_ar1(sds, rho);
        }
        case Family::const_corr: {
            const Eigen::VectorXd sds = diag_values(bundle);
            const Eigen::VectorXd rho = dense_pairs(bundle, true);
            Eigen::MatrixXd corr = Eigen::MatrixXd::Identity(idx(k), idx(k));
            for (std::size_t j = 1; j < k; ++j) {
                for (std::size_t i = 0; i < j; ++i) {
                    corr(idx(i), idx(j)) = corr(idx(j), idx(i)) = rho[idx(offdiag_index(i, j))];
                }
            }
            return sigma_from_const_corr(sds, corr);
        }
    }
    throw invalid_parameter("unknown family");
}

PredictorBundle to_modified_bundle(const PredictorBundle& basic) {
    require_family(basic, Family::basic_chol, "to_modified_bundle");
    const ParamLayout& from = *basic.layout;
    auto layout = std::make_shared<const ParamLayout>(Family::modified_chol, from.dim(), from.mask().order());
    const ModifiedCholParams mp = modified_params(basic);
    Eigen::VectorXd eta(idx(layout->size()));
    for (std::size_t p = 0; p < layout->size(); ++p) {
        const DistParam& d = (*layout)[p];
        switch (d.role) {
            case ParamRole::mean: eta[idx(p)] = basic.eta[idx(p)]; break;
            case ParamRole::innov_var: eta[idx(p)] = std::log(mp.psi()[idx(d.i)]); break;
            case ParamRole::autoreg: eta[idx(p)] = mp.phi_at(d.i, d.j); break;
            default: break;
        }
    }
    return {std::move(layout), std::move(eta)};
}

PredictorBundle to_basic_bundle(const PredictorBundle& modified) {
    require_family(modified, Family::modified_chol, "to_basic_bundle");
    const ParamLayout& from = *modified.layout;
    auto layout = std::make_shared<const ParamLayout>(Family::basic_chol, from.dim(), from.mask().order());
    const InverseCholFactor f = basic_factor(modified);
    Eigen::VectorXd eta(idx(layout->size()));
    for (std::size_t p = 0; p < layout->size(); ++p) {
        const DistParam& d = (*layout)[p];
        switch (d.role) {
            case ParamRole::mean: eta[idx(p)] = modified.eta[idx(p)]; break;
            case ParamRole::chol_diag: eta[idx(p)] = std::log(f.diag()[idx(d.i)]); break;
            case ParamRole::chol_offdiag: eta[idx(p)] = f.at(d.i, d.j); break;
            default: break;
        }
    }
    return {std::move(layout), std::move(eta)};
}

double loglik_basic(const PredictorBundle& bundle, const Eigen::VectorXd& y) {
    require_family(bundle, Family::basic_chol, "loglik_basic");
    const auto k = idx(bundle.dim());
    const InverseCholFactor f = basic_factor(bundle);
    const Eigen::VectorXd resid = y - mean_of(bundle);
    // z = L^{-1} (y - mu), L^{-1} lower triangular with entries lambda_ij at (j, i).
    const Eigen::VectorXd z = f.upper().transpose().triangularView<Eigen::Lower>() * resid;
    double log_diag = 0.0;
    for (Index i = 0; i < k; ++i) log_diag += bundle.eta[idx(bundle.layout->diag_position(static_cast<std::size_t>(i)))];
    return -0.5 * static_cast<double>(k) * log_two_pi + log_diag - 0.5 * z.squaredNorm();
}

double loglik_modified(const PredictorBundle& bundle, const Eigen::VectorXd& y) {
    require_family(bundle, Family::modified_chol, "loglik_modified");
    const std::size_t k = bundle.dim();
    const ModifiedCholParams mp = modified_params(bundle);
    const Eigen::VectorXd resid = y - mean_of(bundle);
    double log_psi = 0.0;
    double quad = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        const double psi_j = mp.psi()[idx(j)];
        log_psi += std::log(psi_j);
        double s = 0.0;
        for (std::size_t i = 0; i <= j; ++i) s += resid[idx(i)] * mp.phi_at(i, j);
        quad += s * s / psi_j;
    }
    return -0.5 * static_cast<double>(k) * log_two_pi - 0.5 * log_psi - 0.5 * quad;
}

double loglik_generic(const Eigen::VectorXd& mu, const CovarianceMatrix& sigma, const Eigen::VectorXd& y) {
    const Eigen::LLT<Eigen::MatrixXd> llt(sigma.matrix());
    if (llt.info() != Eigen::Success) throw numerical_failure("loglik_generic: covariance is singular");
    const Eigen::MatrixXd l = llt.matrixL();
    const double log_det = 2.0 * l.diagonal().array().log().sum();
    const Eigen::VectorXd resid = y - mu;
    const double quad = resid.dot(llt.solve(resid));
    return -0.5 * static_cast<double>(mu.size()) * log_two_pi - 0.5 * log_det - 0.5 * quad;
}

double loglik(const PredictorBundle& bundle, const Eigen::VectorXd& y) {
    switch (bundle.family()) {
        case Family::basic_chol: return loglik_basic(bundle, y);
        case Family::modified_chol: return loglik_modified(bundle, y);
        default: return loglik_generic(mean_of(bundle), covariance_of(bundle), y);
    }
}

namespace {

// Shared by grad_basic and hess_diag_basic; formulas follow the per-entry
// expressions of the inverse-Cholesky log-likelihood.
DerivativeBundle derivatives_basic(const PredictorBundle& bundle, const Eigen::VectorXd& y, bool first,
                                   bool second) {
    require_family(bundle, Family::basic_chol, "grad_basic");
    const ParamLayout& layout = *bundle.layout;
    const std::size_t k = layout.dim();
    const InverseCholFactor f = basic_factor(bundle);
    const Eigen::MatrixXd u = f.upper();
    const Eigen::MatrixXd precision = u * u.transpose();

    DerivativeBundle out;
    out.residual = y - mean_of(bundle);
    const Eigen::VectorXd& r = out.residual;
    out.z = u.transpose().triangularView<Eigen::Lower>() * r;
    if (first) out.first.resize(idx(layout.size()));
    if (second) out.second.resize(idx(layout.size()));

    auto tail_sum = [&](std::size_t upto, std::size_t col) {  // sum_{m <= upto} r_m lambda_{m,col}
        double s = 0.0;
        for (std::size_t m = 0; m <= upto; ++m) s += r[idx(m)] * f.at(m, col);
        return s;
    };

    for (std::size_t p = 0; p < layout.size(); ++p) {
        const DistParam& d = layout[p];
        const std::size_t i = d.i;
        const std::size_t j = d.j;
        double g = 0.0;
        double h = 0.0;
        switch (d.role) {
            case ParamRole::mean: {
                for (std::size_t c = 0; c < k; ++c) g += precision(idx(i), idx(c)) * r[idx(c)];
                for (std::size_t c = i; c < k; ++c) h -= f.at(i, c) * f.at(i, c);
                break;
            }
            case ParamRole::chol_diag: {
                const double lii = f.at(i, i);
                g = 1.0 - lii * r[idx(i)] * tail_sum(i, i);
                const double below = i > 0 ? tail_sum(i - 1, i) : 0.0;
                h = -2.0 * lii * lii * r[idx(i)] * r[idx(i)] - lii * r[idx(i)] * below;
                break;
            }
            case ParamRole::chol_offdiag: {
                g = -r[idx(i)] * tail_sum(j, j);
                h = -r[idx(i)] * r[idx(i)];
                break;
            }
            default: break;
        }
        if (first) out.first[idx(p)] = g;
        if (second) out.second[idx(p)] = h;
    }
    return out;
}

DerivativeBundle derivatives_modified(const PredictorBundle& bundle, const Eigen::VectorXd& y, bool first,
                                      bool second) {
    require_family(bundle, Family::modified_chol, "grad_modified");
    const ParamLayout& layout = *bundle.layout;
    const std::size_t k = layout.dim();
    const ModifiedCholParams mp = modified_params(bundle);
    const Eigen::VectorXd& psi = mp.psi();

    DerivativeBundle out;
    out.residual = y - mean_of(bundle);
    const Eigen::VectorXd& r = out.residual;

    // s_j = sum_{m <= j} r_m phi_mj with phi_jj = -1.
    Eigen::VectorXd s(idx(k));
    for (std::size_t j = 0; j < k; ++j) {
        double acc = 0.0;
        for (std::size_t m = 0; m <= j; ++m) acc += r[idx(m)] * mp.phi_at(m, j);
        s[idx(j)] = acc;
    }
    out.z = -(s.array() / psi.array().sqrt()).matrix();

    Eigen::MatrixXd t = Eigen::MatrixXd::Identity(idx(k), idx(k));
    for (std::size_t j = 1; j < k; ++j) {
        for (std::size_t i = 0; i < j; ++i) t(idx(j), idx(i)) = -mp.phi_at(i, j);
    }
    const Eigen::MatrixXd precision = t.transpose() * psi.cwiseInverse().asDiagonal() * t;
    const Eigen::VectorXd mean_grad = precision * r;

    if (first) out.first.resize(idx(layout.size()));
    if (second) out.second.resize(idx(layout.size()));
    for (std::size_t p = 0; p < layout.size(); ++p) {
        const DistParam& d = layout[p];
        double g = 0.0;
        double h = 0.0;
        switch (d.role) {
            case ParamRole::mean:
                g = mean_grad[idx(d.i)];
                h = -precision(idx(d.i), idx(d.i));
                break;
            case ParamRole::innov_var: {
                const double si = s[idx(d.i)];
                g = 0.5 * (si * si / psi[idx(d.i)] - 1.0);
                h = -0.5 * si * si / psi[idx(d.i)];
                break;
            }
            case ParamRole::autoreg: {
                const double ri = r[idx(d.i)];
                g = -ri / psi[idx(d.j)] * s[idx(d.j)];
                h = -ri * ri / psi[idx(d.j)];
                break;
            }
            default: break;
        }
        if (first) out.first[idx(p)] = g;
        if (second) out.second[idx(p)] = h;
    }
    return out;
}

}  // namespace

DerivativeBundle grad_basic(const PredictorBundle& bundle, const Eigen::VectorXd& y) {
    return derivatives_basic(bundle, y, true, false);
}

DerivativeBundle hess_diag_basic(const PredictorBundle& bundle, const Eigen::VectorXd& y) {
    return derivatives_basic(bundle, y, false, true);
}

DerivativeBundle grad_modified(const PredictorBundle& bundle, const Eigen::VectorXd& y) {
    return derivatives_modified(bundle, y, true, false);
}

DerivativeBundle hess_diag_modified(const PredictorBundle& bundle, const Eigen::VectorXd& y) {
    return derivatives_modified(bundle, y, false, true);
}

DerivativeBundle grad_reference(const PredictorBundle& bundle, const Eigen::VectorXd& y) {
    if (is_cholesky(bundle.family())) throw invalid_parameter("grad_reference requires the ar1 or const_corr family");
    const ParamLayout& layout = *bundle.layout;
    const std::size_t k = layout.dim();

    const CovarianceMatrix sigma = covariance_of(bundle);
    DerivativeBundle out;
    out.residual = y - mean_of(bundle);
    out.first.resize(idx(layout.size()));
    out.second.resize(idx(layout.size()));
    const Eigen::VectorXd mean_grad = sigma.precision() * out.residual;

    auto eval = [&](std::size_t p, double eta_p) {
        PredictorBundle shifted = bundle;
        shifted.eta[idx(p)] = eta_p;
        try {
            return loglik_generic(mean_of(shifted), covariance_of(shifted), y);
        } catch (const std::exception&) {
            return -std::numeric_limits<double>::infinity();
        }
    };

    const double f0 = loglik_generic(mean_of(bundle), sigma, y);
    for (std::size_t p = 0; p < layout.size(); ++p) {
        if (p < k) {
            out.first[idx(p)] = mean_grad[idx(p)];
            out.second[idx(p)] = -sigma.precision()(idx(p), idx(p));
            continue;
        }
        const double e = bundle.eta[idx(p)];
        const double h = fd_step(e);
        const double fp = eval(p, e + h), fm = eval(p, e - h);
        const double fp2 = eval(p, e + 0.5 * h), fm2 = eval(p, e - 0.5 * h);
        const double d1_h = (fp - fm) / (2.0 * h);
        const double d1_h2 = (fp2 - fm2) / h;
        const double d2_h = (fp - 2.0 * f0 + fm) / (h * h);
        const double d2_h2 = (fp2 - 2.0 * f0 + fm2) / (0.25 * h * h);
        out.first[idx(p)] = (4.0 * d1_h2 - d1_h) / 3.0;
        out.second[idx(p)] = (4.0 * d2_h2 - d2_h) / 3.0;
    }
    return out;
}

}  // namespace cholgauss
