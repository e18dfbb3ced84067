#include "cholgauss/scoring.hpp"

#include "cholgauss/errors.hpp"
#include "cholgauss/likelihood.hpp"
#include "cholgauss/random.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

namespace cholgauss {

double dss(const PredictedDistribution& dist, const Eigen::VectorXd& y) {
    Eigen::VectorXd r = y - dist.mu;
    dist.sigma.cholesky().triangularView<Eigen::Lower>().solveInPlace(r);
    return dist.sigma.log_det() + r.squaredNorm();
}

double variogram_score(const PredictedDistribution& dist, const Eigen::VectorXd& y, double p, std::size_t m,
                       std::uint64_t seed) {
    if (!(p > 0.0)) throw invalid_parameter("variogram order must be positive");
    const Eigen::MatrixXd draws = simulate(dist, m, seed);
    const Eigen::Index k = y.size();
    double score = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = i + 1; j < k; ++j) {
            const double expected = (draws.col(i) - draws.col(j)).array().abs().pow(p).mean();
            const double diff = std::pow(std::abs(y[i] - y[j]), p) - expected;
            score += diff * diff;
        }
    }
    return score;
}

void ScorePanel::append(const ScorePanel& other) {
    row.insert(row.end(), other.row.begin(), other.row.end());
    fold.insert(fold.end(), other.fold.begin(), other.fold.end());
    group.insert(group.end(), other.group.begin(), other.group.end());
    dss.insert(dss.end(), other.dss.begin(), other.dss.end());
    vs.insert(vs.end(), other.vs.begin(), other.vs.end());
    loglik.insert(loglik.end(), other.loglik.begin(), other.loglik.end());
    failed_folds.insert(failed_folds.end(), other.failed_folds.begin(), other.failed_folds.end());
    errors.insert(errors.end(), other.errors.begin(), other.errors.end());
}

namespace {

template <typename Key>
std::map<Key, ScoreMeans> mean_by(const ScorePanel& panel, const std::vector<Key>& keys) {
    std::map<Key, ScoreMeans> out;
    for (std::size_t r = 0; r < panel.size(); ++r) {
        ScoreMeans& m = out[keys[r]];
        ++m.count;
        m.dss += panel.dss[r];
        m.vs += panel.vs[r];
        m.loglik += panel.loglik[r];
    }
    for (auto& [key, m] : out) {
        const auto c = static_cast<double>(m.count);
        m.dss /= c;
        m.vs /= c;
        m.loglik /= c;
    }
    return out;
}

}  // namespace

std::map<std::string, ScoreMeans> mean_by_group(const ScorePanel& panel) { return mean_by(panel, panel.group); }

std::map<int, ScoreMeans> mean_by_fold(const ScorePanel& panel) { return mean_by(panel, panel.fold); }

ScoreMeans overall_mean(const ScorePanel& panel) {
    const std::vector<int> keys(panel.size(), 0);
    const auto m = mean_by(panel, keys);
    return m.empty() ? ScoreMeans{} : m.begin()->second;
}

ScorePanel score_rows(const FitState& fit, const DataTable& data, const std::vector<std::size_t>& rows,
                      const ScoreOptions& options, int fold, const std::vector<std::string>* groups) {
    const DataTable sub = data.select_rows(rows);
    const auto y = sub.matrix(fit.spec.response);
    const std::vector<PredictedDistribution> dists = predict(fit, sub);
    ScorePanel panel;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const Eigen::VectorXd yr = y.row(static_cast<Eigen::Index>(r)).transpose();
        const PredictedDistribution& d = dists[r];
        panel.row.push_back(rows[r]);
        panel.fold.push_back(fold);
        panel.group.push_back(groups ? (*groups)[rows[r]] : std::string("all"));
        panel.dss.push_back(dss(d, yr));
        panel.vs.push_back(variogram_score(d, yr, options.vs_order, options.vs_draws, child_seed(options.seed, rows[r])));
        panel.loglik.push_back(loglik_generic(d.mu, d.sigma, yr));
    }
    return panel;
}

std::vector<std::string> year_month_labels(const Eigen::VectorXd& day_index) {
    using namespace std::chrono;
    const sys_days epoch = year{2010} / January / 1;
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(day_index.size()));
    for (Eigen::Index i = 0; i < day_index.size(); ++i) {
        const year_month_day ymd{epoch + days{static_cast<long>(std::lround(day_index[i]))}};
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()));
        out.emplace_back(buf);
    }
    return out;
}

Eigen::VectorXd rmse_params(const TruthFunction& truth, const FitState& fit, const DataTable& points) {
    const Eigen::MatrixXd est = predict_parameters(fit, points);
    Eigen::VectorXd sse = Eigen::VectorXd::Zero(est.cols());
    for (Eigen::Index r = 0; r < est.rows(); ++r) {
        const Eigen::VectorXd t = truth(points, static_cast<std::size_t>(r));
        if (t.size() != est.cols()) throw invalid_parameter("truth has the wrong number of parameters");
        sse += (est.row(r).transpose() - t).array().square().matrix();
    }
    return (sse / static_cast<double>(est.rows())).array().sqrt();
}

}  // namespace cholgauss
