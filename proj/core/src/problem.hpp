#pragma once

// Shared fitting state for the penalized likelihood fitter and the sampler.

#include "cholgauss/estimate.hpp"
#include "cholgauss/kernel.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace cholgauss::detail {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double v) noexcept {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            c_ += (sum_ - t) + v;
        } else {
            c_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    [[nodiscard]] double value() const noexcept { return sum_ + c_; }

private:
    double sum_ = 0.0;
    double c_ = 0.0;
};

class Problem {
public:
    Problem(const ModelSpec& spec, const DataTable& data, const FitOptions& options);

    const ModelSpec& spec;
    FitOptions options;
    FamilyKernel kernel;
    std::size_t n;
    std::size_t k;
    std::size_t nparams;
    RowMatrix y;
    RowMatrix eta;
    std::vector<std::vector<BasisBlock>> blocks;  // per parameter, per term
    std::vector<Eigen::MatrixXd> design;          // per parameter, terms stacked
    std::vector<std::vector<Eigen::Index>> offset;
    std::vector<Eigen::VectorXd> beta;
    std::vector<std::vector<double>> lambda;
    std::vector<std::string> warnings;
    KernelWorkspace ws;

    void set_smoothing(const std::vector<std::vector<double>>& values);
    void initialize();
    void load(const FitState& state);
    void refresh_eta(std::size_t p);

    [[nodiscard]] double loglik();
    [[nodiscard]] double penalty(std::size_t p) const;
    [[nodiscard]] double pen_loglik();
    [[nodiscard]] Eigen::MatrixXd penalty_matrix(std::size_t p) const;

    // Per-row first and second derivatives for coordinate p.
    void derivatives(std::size_t p, Eigen::VectorXd& g, Eigen::VectorXd& h);
    // Clamped weights and working response for coordinate p.
    void working(std::size_t p, Eigen::VectorXd& w, Eigen::VectorXd& z);

    // One monotone IWLS step on parameter p; returns the new penalized log-likelihood.
    double iwls_step(std::size_t p, double current);
    // Effective degrees of freedom per term of parameter p at the current state.
    [[nodiscard]] std::vector<double> term_edf(std::size_t p);

    [[nodiscard]] FitState state(bool converged, std::size_t iterations);

private:
    bool ridge_warned_ = false;
};

}  // namespace cholgauss::detail
