#pragma once

#include "cholgauss/covparam.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cholgauss {

enum class Family { basic_chol, modified_chol, ar1, const_corr };

[[nodiscard]] std::string_view to_string(Family family) noexcept;
// Accepts the canonical names plus "basic", "modified", "constant_correlation".
[[nodiscard]] Family parse_family(std::string_view name);
[[nodiscard]] bool is_cholesky(Family family) noexcept;

enum class LinkKind { identity, log, rho };

// Maps a distributional parameter theta to the unrestricted predictor eta.
// The rho link is r(rho) = rho / sqrt(1 - rho^2) with inverse eta / sqrt(1 + eta^2).
struct LinkFunction {
    LinkKind kind = LinkKind::identity;

    [[nodiscard]] double forward(double theta) const;
    [[nodiscard]] double inverse(double eta) const;
    [[nodiscard]] double dtheta_deta(double eta) const;
};

[[nodiscard]] std::string_view to_string(LinkKind kind) noexcept;

enum class ParamRole {
    mean,          // mu_i
    chol_diag,     // lambda_ii
    chol_offdiag,  // lambda_ij
    innov_var,     // psi_i
    autoreg,       // phi_ij
    sd,            // sigma_i
    ar1_rho,       // single AR1 correlation
    corr,          // rho_ij
};

// One distributional parameter with 0-based indices (j unused for
// single-index roles).
struct DistParam {
    ParamRole role;
    std::size_t i = 0;
    std::size_t j = 0;
    LinkFunction link;
    std::string name;  // 1-based display name, e.g. "phi[1,3]"
};

// Ordered set of active (non-structural-zero) distributional parameters of a family.
// Order: means, then the k diagonal-type parameters, then pair parameters in
// offdiag_index order (AR1 has a single rho last).
class ParamLayout {
public:
    ParamLayout(Family family, std::size_t dim, std::optional<std::size_t> ad_order = std::nullopt);

    [[nodiscard]] Family family() const noexcept { return family_; }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] const ADMask& mask() const noexcept { return mask_; }
    [[nodiscard]] std::size_t size() const noexcept { return params_.size(); }
    [[nodiscard]] const DistParam& operator[](std::size_t p) const { return params_[p]; }
    [[nodiscard]] const std::vector<DistParam>& params() const noexcept { return params_; }

    [[nodiscard]] std::optional<std::size_t> find(std::string_view name) const;
    // Layout position of pair (i, j), or nullopt for structural zeros / non-pair families.
    [[nodiscard]] std::optional<std::size_t> pair_position(std::size_t i, std::size_t j) const;
    [[nodiscard]] std::size_t mean_position(std::size_t i) const noexcept { return i; }
    [[nodiscard]] std::size_t diag_position(std::size_t i) const noexcept { return dim_ + i; }

    // Covariance-defining parameters fixed at zero by structure (AD masks, AR1).
    [[nodiscard]] std::size_t structural_zero_count() const noexcept;
    [[nodiscard]] std::size_t covariance_parameter_count() const noexcept { return size() - dim_; }

private:
    Family family_;
    std::size_t dim_;
    ADMask mask_;
    std::vector<DistParam> params_;
    std::vector<std::optional<std::size_t>> pair_pos_;  // by offdiag_index
};

}  // namespace cholgauss
