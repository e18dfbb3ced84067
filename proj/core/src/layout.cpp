#include "cholgauss/layout.hpp"

#include "cholgauss/errors.hpp"

#include <cmath>

namespace cholgauss {

std::string_view to_string(Family family) noexcept {
    switch (family) {
        case Family::basic_chol: return "basic_chol";
        case Family::modified_chol: return "modified_chol";
        case Family::ar1: return "ar1";
        case Family::const_corr: return "const_corr";
    }
    return "unknown";
}

Family parse_family(std::string_view name) {
    if (name == "basic_chol" || name == "basic") return Family::basic_chol;
    if (name == "modified_chol" || name == "modified") return Family::modified_chol;
    if (name == "ar1") return Family::ar1;
    if (name == "const_corr" || name == "constant_correlation") return Family::const_corr;
    throw schema_error("unknown family '" + std::string(name) + "'");
}

bool is_cholesky(Family family) noexcept {
    return family == Family::basic_chol || family == Family::modified_chol;
}

std::string_view to_string(LinkKind kind) noexcept {
    switch (kind) {
        case LinkKind::identity: return "identity";
        case LinkKind::log: return "log";
        case LinkKind::rho: return "rho";
    }
    return "unknown";
}

double LinkFunction::forward(double theta) const {
    switch (kind) {
        case LinkKind::identity: return theta;
        case LinkKind::log: return std::log(theta);
        case LinkKind::rho: return theta / std::sqrt(1.0 - theta * theta);
    }
    return theta;
}

double LinkFunction::inverse(double eta) const {
    switch (kind) {
        case LinkKind::identity: return eta;
        case LinkKind::log: return std::exp(eta);
        case LinkKind::rho: return eta / std::sqrt(1.0 + eta * eta);
    }
    return eta;
}

double LinkFunction::dtheta_deta(double eta) const {
    switch (kind) {
        case LinkKind::identity: return 1.0;
        case LinkKind::log: return std::exp(eta);
        case LinkKind::rho: return std::pow(1.0 + eta * eta, -1.5);
    }
    return 1.0;
}

namespace {

std::string one_index(const char* base, std::size_t i) {
    return std::string(base) + "[" + std::to_string(i + 1) + "]";
}

std::string two_index(const char* base, std::size_t i, std::size_t j) {
    return std::string(base) + "[" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "]";
}

}  // namespace

ParamLayout::ParamLayout(Family family, std::size_t dim, std::optional<std::size_t> ad_order)
    : family_(family), dim_(dim), mask_(dim, ad_order), pair_pos_(offdiag_count(dim)) {
    if (dim == 0) throw invalid_parameter("dimension must be at least 1");
    if (ad_order && !is_cholesky(family)) {
        throw schema_error("antedependence order only applies to Cholesky families");
    }
    for (std::size_t i = 0; i < dim; ++i) {
        params_.push_back({ParamRole::mean, i, i, {LinkKind::identity}, one_index("mu", i)});
    }
    switch (family) {
        case Family::basic_chol:
            for (std::size_t i = 0; i < dim; ++i) {
                params_.push_back({ParamRole::chol_diag, i, i, {LinkKind::log}, two_index("lambda", i, i)});
            }
            break;
        case Family::modified_chol:
            for (std::size_t i = 0; i < dim; ++i) {
                params_.push_back({ParamRole::innov_var, i, i, {LinkKind::log}, one_index("psi", i)});
            }
            break;
        case Family::ar1:
        case Family::const_corr:
            for (std::size_t i = 0; i < dim; ++i) {
                params_.push_back({ParamRole::sd, i, i, {LinkKind::log}, one_index("sigma", i)});
            }
            break;
    }

    if (family == Family::ar1) {
        if (dim > 1) params_.push_back({ParamRole::ar1_rho, 0, 1, {LinkKind::rho}, "rho"});
        return;
    }
    for (std::size_t j = 1; j < dim; ++j) {
        for (std::size_t i = 0; i < j; ++i) {
            if (!mask_.active(i, j)) continue;
            pair_pos_[offdiag_index(i, j)] = params_.size();
            switch (family) {
                case Family::basic_chol:
                    params_.push_back({ParamRole::chol_offdiag, i, j, {LinkKind::identity}, two_index("lambda", i, j)});
                    break;
                case Family::modified_chol:
                    params_.push_back({ParamRole::autoreg, i, j, {LinkKind::identity}, two_index("phi", i, j)});
                    break;
                default:
                    params_.push_back({ParamRole::corr, i, j, {LinkKind::rho}, two_index("rho", i, j)});
                    break;
            }
        }
    }
}

std::optional<std::size_t> ParamLayout::find(std::string_view name) const {
    for (std::size_t p = 0; p < params_.size(); ++p) {
        if (params_[p].name == name) return p;
    }
    return std::nullopt;
}

std::optional<std::size_t> ParamLayout::pair_position(std::size_t i, std::size_t j) const {
    if (i >= j || j >= dim_) return std::nullopt;
    return pair_pos_[offdiag_index(i, j)];
}

std::size_t ParamLayout::structural_zero_count() const noexcept {
    const std::size_t total = dim_ * (dim_ + 1) / 2;
    return total - covariance_parameter_count();
}

}  // namespace cholgauss
