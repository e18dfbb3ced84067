#pragma once

#include "cholgauss/estimate.hpp"
#include "cholgauss/predict.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cholgauss {

// Dawid-Sebastiani score: log det Sigma + (y - mu)^T Sigma^{-1} (y - mu).
[[nodiscard]] double dss(const PredictedDistribution& dist, const Eigen::VectorXd& y);

// Variogram score of order p with unit weights; the expected pairwise
// differences come from m seeded draws of the predictive distribution.
[[nodiscard]] double variogram_score(const PredictedDistribution& dist, const Eigen::VectorXd& y, double p = 0.5,
                                     std::size_t m = 1000, std::uint64_t seed = 1);

struct ScoreOptions {
    double vs_order = 0.5;
    std::size_t vs_draws = 1000;
    std::uint64_t seed = 1;
};

// Per-row scores with fold and group labels.
struct ScorePanel {
    std::vector<std::size_t> row;
    std::vector<int> fold;
    std::vector<std::string> group;
    std::vector<double> dss;
    std::vector<double> vs;
    std::vector<double> loglik;
    std::vector<int> failed_folds;
    std::vector<std::string> errors;

    [[nodiscard]] std::size_t size() const noexcept { return row.size(); }
    void append(const ScorePanel& other);
};

struct ScoreMeans {
    std::size_t count = 0;
    double dss = 0.0;
    double vs = 0.0;
    double loglik = 0.0;
};

[[nodiscard]] std::map<std::string, ScoreMeans> mean_by_group(const ScorePanel& panel);
[[nodiscard]] std::map<int, ScoreMeans> mean_by_fold(const ScorePanel& panel);
[[nodiscard]] ScoreMeans overall_mean(const ScorePanel& panel);

// Scores `fit` on the given rows of `data`; labels default to fold 0 and group "all".
[[nodiscard]] ScorePanel score_rows(const FitState& fit, const DataTable& data, const std::vector<std::size_t>& rows,
                                    const ScoreOptions& options = {}, int fold = 0,
                                    const std::vector<std::string>* groups = nullptr);

// Labels "YYYY-MM" for integer day offsets from 2010-01-01.
[[nodiscard]] std::vector<std::string> year_month_labels(const Eigen::VectorXd& day_index);

// Root-mean-squared error of every distributional parameter, on the natural
// parameter scale, against `truth(points, r)` (layout order).
using TruthFunction = std::function<Eigen::VectorXd(const DataTable&, std::size_t)>;
[[nodiscard]] Eigen::VectorXd rmse_params(const TruthFunction& truth, const FitState& fit, const DataTable& points);

enum class FoldScheme { random, contiguous };

struct CvFold {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

[[nodiscard]] std::vector<CvFold> make_folds(std::size_t n, std::size_t folds, FoldScheme scheme, std::uint64_t seed);

struct CvOptions {
    std::size_t folds = 5;
    FoldScheme scheme = FoldScheme::random;
    std::uint64_t seed = 1;
    FitOptions fit;
    ScoreOptions score;
    std::string date_column = "date";  // year-month groups when present
    unsigned workers = 1;
};

// Fits on k-1 folds and scores the held-out fold. Failed folds are listed in
// the panel with their error text; the remaining folds are still returned.
[[nodiscard]] ScorePanel kfold_cv(const ModelSpec& spec, const DataTable& data, const CvOptions& options = {});

}  // namespace cholgauss
