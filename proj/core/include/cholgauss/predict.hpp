#pragma once

#include "cholgauss/covparam.hpp"
#include "cholgauss/data_table.hpp"
#include "cholgauss/estimate.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace cholgauss {

struct PredictedDistribution {
    Eigen::VectorXd mu;
    CovarianceMatrix sigma;
    std::size_t row = 0;
};

// Distribution for one row of link-scale predictors (layout order).
[[nodiscard]] PredictedDistribution distribution_at(const std::shared_ptr<const ParamLayout>& layout,
                                                    const Eigen::VectorXd& eta, std::size_t row = 0);

// Warnings about extrapolated covariate values are appended when requested.
[[nodiscard]] std::vector<PredictedDistribution> predict(const FitState& fit, const DataTable& newdata,
                                                         std::vector<std::string>* warnings = nullptr);

// Distributional parameters on their natural scale (n x P, layout order).
[[nodiscard]] Eigen::MatrixXd predict_parameters(const FitState& fit, const DataTable& newdata);

// m draws (m x k) of mu + L eps with Sigma = L L^T.
[[nodiscard]] Eigen::MatrixXd simulate(const PredictedDistribution& dist, std::size_t m, std::uint64_t seed);

}  // namespace cholgauss
