#pragma once

#include "cholgauss/data_table.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cholgauss {

enum class TermKind { intercept, linear, smooth, cyclic_smooth, varying_coefficient };

struct TermSpec {
    TermKind kind = TermKind::intercept;
    std::string covariate;  // smoothing / linear covariate
    std::string by;         // interaction covariate of a varying-coefficient term
    std::size_t basis_size = 10;
    std::size_t penalty_order = 2;
    std::optional<double> period;  // cyclic smooths; a varying term is cyclic when set

    [[nodiscard]] bool cyclic() const noexcept {
        return kind == TermKind::cyclic_smooth || (kind == TermKind::varying_coefficient && period.has_value());
    }
    [[nodiscard]] bool spline() const noexcept {
        return kind == TermKind::smooth || kind == TermKind::cyclic_smooth || kind == TermKind::varying_coefficient;
    }
    // Formula-style label, e.g. "s(x)", "cyclic(yday):mean_1".
    [[nodiscard]] std::string label() const;
};

// Cubic B-splines on equally spaced knots. The open variant covers [lo, hi]
// with d - 3 intervals; the cyclic variant wraps d functions over [0, period).
class SplineBasis {
public:
    static SplineBasis open(double lo, double hi, std::size_t size);
    static SplineBasis cyclic(double period, std::size_t size);

    [[nodiscard]] std::size_t size() const noexcept { return size_; }
    [[nodiscard]] bool is_cyclic() const noexcept { return cyclic_; }
    [[nodiscard]] double lo() const noexcept { return lo_; }
    [[nodiscard]] double hi() const noexcept { return hi_; }

    // Writes the d basis values (and optionally first / second derivatives in x).
    // Open bases continue linearly outside [lo, hi]; returns true in that case.
    bool eval(double x, std::span<double> values, std::span<double> d1 = {}, std::span<double> d2 = {}) const;

    // D^T D for the order-q difference matrix (circulant when cyclic).
    [[nodiscard]] Eigen::MatrixXd penalty(std::size_t order) const;
    [[nodiscard]] std::size_t penalty_rank(std::size_t order) const noexcept;

private:
    SplineBasis(double lo, double hi, std::size_t size, bool cyclic);

    double lo_;
    double hi_;
    std::size_t size_;
    bool cyclic_;
};

// Design matrix and penalty of one additive term. Smooths that share the
// predictor with an intercept are centered by a sum-to-zero column transform.
class BasisBlock {
public:
    BasisBlock(TermSpec spec, std::optional<SplineBasis> spline, Eigen::MatrixXd constraint, Eigen::MatrixXd design,
               std::vector<std::string> warnings = {});

    [[nodiscard]] const TermSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] const std::optional<SplineBasis>& spline() const noexcept { return spline_; }
    // d x d' column transform applied to the raw spline basis (empty if none).
    [[nodiscard]] const Eigen::MatrixXd& constraint() const noexcept { return constraint_; }
    // Training design (n x columns); empty for blocks restored from an artifact.
    [[nodiscard]] const Eigen::MatrixXd& design() const noexcept { return design_; }
    [[nodiscard]] const Eigen::MatrixXd& penalty() const noexcept { return penalty_; }
    [[nodiscard]] std::size_t columns() const noexcept { return columns_; }
    [[nodiscard]] std::size_t penalty_rank() const noexcept { return penalty_rank_; }
    [[nodiscard]] bool penalized() const noexcept { return penalty_rank_ > 0; }
    [[nodiscard]] const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    // Design rows for new covariate values; counts extrapolated rows.
    [[nodiscard]] Eigen::MatrixXd design_for(const DataTable& data, std::size_t* extrapolated = nullptr) const;

    // Same block without the training design (for artifacts and prediction).
    [[nodiscard]] BasisBlock without_design() const;

private:
    TermSpec spec_;
    std::optional<SplineBasis> spline_;
    Eigen::MatrixXd constraint_;
    Eigen::MatrixXd design_;
    Eigen::MatrixXd penalty_;
    std::size_t columns_ = 0;
    std::size_t penalty_rank_ = 0;
    std::vector<std::string> warnings_;
};

[[nodiscard]] BasisBlock build_block(const TermSpec& spec, const DataTable& data);

// f(x) = B(x) beta at new covariate values.
[[nodiscard]] Eigen::VectorXd evaluate_term(const BasisBlock& block, const DataTable& newdata,
                                            const Eigen::VectorXd& beta, std::size_t* extrapolated = nullptr);

}  // namespace cholgauss
