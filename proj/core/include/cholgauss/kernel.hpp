#pragma once

#include "cholgauss/layout.hpp"

#include <Eigen/Dense>

#include <memory>
#include <span>
#include <vector>

namespace cholgauss {

// Per-thread scratch space for FamilyKernel.
struct KernelWorkspace {
    std::vector<double> lambda;  // k x k row-major upper triangle of (L^{-1})^T
    std::vector<double> resid;
    std::vector<double> z;
    std::vector<double> eta;     // shifted copy for finite differences
    Eigen::MatrixXd sigma;
    Eigen::VectorXd vec;
    Eigen::LLT<Eigen::MatrixXd> llt;
};

// Row-level log-likelihood and single-coordinate derivatives used in the
// fitting and sampling inner loops. Cholesky families cost O(k) per
// non-mean coordinate and O(k^2) per mean coordinate or log-likelihood.
// Reference families assemble Sigma and factor it per call.
class FamilyKernel {
public:
    explicit FamilyKernel(std::shared_ptr<const ParamLayout> layout);

    [[nodiscard]] const ParamLayout& layout() const noexcept { return *layout_; }
    [[nodiscard]] KernelWorkspace workspace() const;

    // Returns -inf when Sigma cannot be assembled (reference families only).
    [[nodiscard]] double loglik(std::span<const double> eta, std::span<const double> y, KernelWorkspace& ws) const;

    struct Coordinate {
        double first;
        double second;
    };
    [[nodiscard]] Coordinate coordinate(std::span<const double> eta, std::span<const double> y, std::size_t p,
                                        KernelWorkspace& ws) const;

private:
    void load_cholesky(std::span<const double> eta, std::span<const double> y, KernelWorkspace& ws) const;
    double z_at(std::size_t j, KernelWorkspace& ws) const;
    bool assemble_reference(std::span<const double> eta, KernelWorkspace& ws) const;
    double reference_loglik(std::span<const double> eta, std::span<const double> y, KernelWorkspace& ws) const;

    std::shared_ptr<const ParamLayout> layout_;
    std::size_t k_;
};

}  // namespace cholgauss
