#pragma once

#include "cholgauss/estimate.hpp"
#include "cholgauss/model_spec.hpp"
#include "cholgauss/scoring.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace cholgauss {

struct ExperimentOptions {
    std::size_t reps = 10;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    FitOptions fit;
    std::size_t eval_points = 10000;
    std::vector<std::size_t> ns{100, 500, 1000, 5000, 10000};
    std::vector<double> alphas{0.0, 0.1, 0.25, 0.5, 1.0, 2.0};
    std::vector<std::size_t> ks{3, 5, 10, 15};
    std::size_t n = 5000;   // fixed size for the alpha and dimension sweeps
    double alpha = 1.0;     // fixed nonlinearity for rmse_vs_n and dim_sweep
};

// One RMSE value of one parameter in one replication.
struct RmseRecord {
    std::string model;
    std::size_t n = 0;
    std::size_t k = 0;
    double alpha = 0.0;
    std::size_t rep = 0;
    std::string param;
    double rmse = 0.0;
};

struct RmseTable {
    std::vector<RmseRecord> records;
    std::vector<std::string> failures;  // one line per failed replication
};

// Spline ("s(x)") or linear ("x") modified-Cholesky spec for the simulation studies.
[[nodiscard]] ModelSpec simulation_spec(std::size_t k, bool splines);

// RMSE of every parameter for one simulated data set and fitted spec.
[[nodiscard]] Eigen::VectorXd simulation_rmse(const ModelSpec& spec, std::size_t n, std::size_t k, double alpha,
                                              std::uint64_t data_seed, std::uint64_t eval_seed,
                                              std::size_t eval_points, const FitOptions& fit_options);

[[nodiscard]] RmseTable rmse_vs_n(const ExperimentOptions& options);
[[nodiscard]] RmseTable misspec_alpha(const ExperimentOptions& options);
[[nodiscard]] RmseTable dim_sweep(const ExperimentOptions& options);

void write_rmse_csv(std::ostream& out, const RmseTable& table);

// Median RMSE per (model, n, k, alpha, param).
struct RmseSummary {
    std::string model;
    std::size_t n;
    std::size_t k;
    double alpha;
    std::string param;
    double median;
    std::size_t count;
};
[[nodiscard]] std::vector<RmseSummary> summarize(const RmseTable& table);
void write_summary_csv(std::ostream& out, const std::vector<RmseSummary>& rows);

struct ModelComparison {
    std::vector<std::string> models;
    std::map<std::string, ScorePanel> panels;
    std::string reference;
};

// Cross-validated scores of several specs on the same data and folds.
[[nodiscard]] ModelComparison model_compare(const std::vector<ModelSpec>& specs, const DataTable& data,
                                            const CvOptions& options, const std::string& reference);

// Per-row panel (model, row, fold, group, dss, vs, loglik).
void write_panel_csv(std::ostream& out, const ModelComparison& cmp);
// Per (model, group) means and their differences against the reference.
void write_group_csv(std::ostream& out, const ModelComparison& cmp);
void write_fold_csv(std::ostream& out, const ModelComparison& cmp);

}  // namespace cholgauss
