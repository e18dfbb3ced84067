#pragma once

#include "cholgauss/covparam.hpp"
#include "cholgauss/data_table.hpp"
#include "cholgauss/layout.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace cholgauss {

struct SimConfig {
    std::size_t n = 500;
    std::size_t k = 3;
    double alpha = 1.0;
    std::uint64_t seed = 1;
};

// Throws invalid_parameter unless k is one of 3, 5, 10, 15 and alpha >= 0.
void validate(const SimConfig& cfg);
[[nodiscard]] const std::vector<std::size_t>& supported_dimensions();

struct TrueParams {
    Eigen::VectorXd mu;
    Eigen::VectorXd psi;
    Eigen::VectorXd phi;  // offdiag_index order

    [[nodiscard]] ModifiedCholParams modified() const { return {psi, phi}; }
};

// Mixture of constant, linear and quadratic effects in x; the trivariate
// pattern repeats with period 3 for larger k with only lag-1 dependence.
[[nodiscard]] TrueParams true_params(double x, std::size_t k, double alpha);

// Truth in modified-Cholesky layout order on the natural scale (mu, psi, phi).
[[nodiscard]] Eigen::VectorXd true_parameter_vector(double x, const ParamLayout& layout, double alpha);

// Columns x, y1..yk. x is drawn first, then the innovations component by
// component, so the leading components agree across k and alpha for one seed.
[[nodiscard]] DataTable generate(const SimConfig& cfg);

// Truth on an x grid: x, mu_i, psi_i, phi_i_j (lag one only).
[[nodiscard]] DataTable truth_table(const SimConfig& cfg, std::size_t points = 201);

// Ten lead times, columns: date, yday, mean_1..10, logsd_1..10, obs_1..10.
[[nodiscard]] DataTable generate_weather_analog(std::size_t n = 1798, std::uint64_t seed = 1);

// Modified-Cholesky truth of the weather analog for one row of covariates.
struct WeatherTruth {
    Eigen::VectorXd mu;
    ModifiedCholParams params;
};
[[nodiscard]] WeatherTruth weather_truth(double yday, const Eigen::VectorXd& mean, const Eigen::VectorXd& logsd);

}  // namespace cholgauss
