#pragma once

#include "cholgauss/basis.hpp"
#include "cholgauss/data_table.hpp"
#include "cholgauss/model_spec.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace cholgauss {

struct TermFit {
    BasisBlock block;
    Eigen::VectorXd beta;
    double smoothing = 0.0;
    double edf = 0.0;
};

struct ParamFit {
    std::string name;
    std::vector<TermFit> terms;
};

// Everything needed to predict (mu, Sigma) at new covariate values.
struct FitState {
    ModelSpec spec;
    std::vector<ParamFit> params;  // layout order
    bool converged = false;
    std::size_t iterations = 0;
    std::size_t n = 0;
    double loglik = 0.0;
    double pen_loglik = 0.0;
    double edf = 0.0;
    double aic = 0.0;
    std::vector<std::string> warnings;

    // n x P matrix of predictor values in layout order.
    [[nodiscard]] Eigen::MatrixXd predictors(const DataTable& data, std::size_t* extrapolated = nullptr) const;
    [[nodiscard]] std::vector<std::vector<double>> smoothing() const;
};

[[nodiscard]] std::vector<double> default_smoothing_grid();

struct FitOptions {
    std::size_t max_outer = 200;
    double tolerance = 1e-8;
    std::size_t max_halvings = 30;
    double weight_floor = 1e-10;
    double ridge = 1e-8;
    double initial_smoothing = 10.0;
    bool select_smoothing = true;
    std::vector<double> smoothing_grid = default_smoothing_grid();
    std::size_t selection_iterations = 4;
};

// Penalized maximum likelihood at fixed smoothing parameters (per parameter,
// per term; the intercept entry is ignored). Without explicit values every
// smooth uses options.initial_smoothing.
[[nodiscard]] FitState fit_pml(const ModelSpec& spec, const DataTable& data, const FitOptions& options = {},
                               const std::vector<std::vector<double>>* smoothing = nullptr);

// One AIC-guided pass over the smooth terms on a log grid. Warnings for
// boundary selections are appended to `warnings` when given.
[[nodiscard]] std::vector<std::vector<double>> select_smoothing(const ModelSpec& spec, const DataTable& data,
                                                                const std::vector<double>& grid,
                                                                const FitOptions& options = {},
                                                                std::vector<std::string>* warnings = nullptr);

// select_smoothing (if enabled) followed by fit_pml.
[[nodiscard]] FitState fit(const ModelSpec& spec, const DataTable& data, const FitOptions& options = {});

}  // namespace cholgauss
