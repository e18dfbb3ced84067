#pragma once

#include "cholgauss/data_table.hpp"
#include "cholgauss/estimate.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cholgauss {

struct McmcOptions {
    std::size_t iterations = 12000;
    std::size_t burnin = 2000;
    std::size_t thin = 10;
    std::uint64_t seed = 1;
    double prior_a = 1e-4;  // inverse-gamma prior on smoothing variances
    double prior_b = 1e-4;
};

// One sampler block: the coefficients of a single term of one parameter.
struct McmcBlock {
    std::size_t param;
    std::size_t term;
    Eigen::Index offset;  // column in ChainState::samples
    Eigen::Index size;
    bool penalized;
};

struct ChainState {
    FitState base;
    std::vector<McmcBlock> blocks;
    Eigen::MatrixXd samples;  // saved draws x all coefficients
    Eigen::MatrixXd tau2;     // saved draws x blocks; NaN for unpenalized blocks
    std::vector<double> acceptance;         // per block, after burn-in
    std::vector<double> burnin_acceptance;  // per block, during burn-in
    std::vector<std::string> warnings;

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(samples.rows()); }
    [[nodiscard]] Eigen::VectorXd coefficients(std::size_t draw, std::size_t param, std::size_t term) const;
    // Trace of one coefficient of a term across saved draws.
    [[nodiscard]] Eigen::VectorXd trace(std::size_t param, std::size_t term, Eigen::Index coefficient) const;
    // Fit state with the coefficients of draw `draw`.
    [[nodiscard]] FitState draw(std::size_t draw) const;
};

// IWLS-proposal Metropolis-Hastings started at `start` (usually a PML fit on
// the same data). Deterministic given the seed.
[[nodiscard]] ChainState fit_mcmc(const FitState& start, const DataTable& data, const McmcOptions& options = {});

struct Band {
    double lower;
    double median;
    double upper;
};

// Pointwise quantile bands of a term effect (or of the whole predictor when
// `term` is empty) on the link scale.
[[nodiscard]] std::vector<Band> credible_bands(const ChainState& chain, std::size_t param,
                                               std::optional<std::size_t> term, const DataTable& grid,
                                               double level = 0.95);

[[nodiscard]] double autocorrelation(std::span<const double> series, std::size_t lag);

// Type-7 sample quantile of unsorted values.
[[nodiscard]] double quantile(std::vector<double> values, double prob);

}  // namespace cholgauss
