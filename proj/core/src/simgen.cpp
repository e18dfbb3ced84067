#include "cholgauss/simgen.hpp"

#include "cholgauss/errors.hpp"
#include "cholgauss/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace cholgauss {

const std::vector<std::size_t>& supported_dimensions() {
    static const std::vector<std::size_t> dims{3, 5, 10, 15};
    return dims;
}

void validate(const SimConfig& cfg) {
    const auto& dims = supported_dimensions();
    if (std::find(dims.begin(), dims.end(), cfg.k) == dims.end())
        throw invalid_parameter("unsupported dimension k=" + std::to_string(cfg.k) + " (use 3, 5, 10 or 15)");
    if (!(cfg.alpha >= 0.0) || !std::isfinite(cfg.alpha)) throw invalid_parameter("alpha must be finite and >= 0");
    if (cfg.n == 0) throw invalid_parameter("n must be positive");
}

TrueParams true_params(double x, std::size_t k, double alpha) {
    if (k == 0) throw invalid_parameter("k must be positive");
    const double quad = alpha * x * x;
    const double mu3[3] = {1.0, 1.0 + x, 1.0 + quad};
    const double logpsi3[3] = {-2.0, -2.0 + x, -2.0 + quad};
    const double phi12 = (1.0 + quad) / 4.0;
    const double phi23 = (3.0 + x) / 4.0;
    TrueParams t{Eigen::VectorXd(static_cast<Eigen::Index>(k)), Eigen::VectorXd(static_cast<Eigen::Index>(k)),
                 Eigen::VectorXd::Zero(static_cast<Eigen::Index>(offdiag_count(k)))};
    for (std::size_t i = 0; i < k; ++i) {
        t.mu[static_cast<Eigen::Index>(i)] = mu3[i % 3];
        t.psi[static_cast<Eigen::Index>(i)] = std::exp(logpsi3[i % 3]);
    }
    // Lag-one pairs alternate between the phi12 and phi23 patterns.
    for (std::size_t i = 0; i + 1 < k; ++i) {
        t.phi[static_cast<Eigen::Index>(offdiag_index(i, i + 1))] = i % 2 == 0 ? phi12 : phi23;
    }
    return t;
}

Eigen::VectorXd true_parameter_vector(double x, const ParamLayout& layout, double alpha) {
    if (layout.family() != Family::modified_chol) throw invalid_parameter("truth is defined for the modified family");
    const TrueParams t = true_params(x, layout.dim(), alpha);
    Eigen::VectorXd out(static_cast<Eigen::Index>(layout.size()));
    for (std::size_t p = 0; p < layout.size(); ++p) {
        const DistParam& d = layout[p];
        const auto i = static_cast<Eigen::Index>(d.i);
        switch (d.role) {
            case ParamRole::mean: out[static_cast<Eigen::Index>(p)] = t.mu[i]; break;
            case ParamRole::innov_var: out[static_cast<Eigen::Index>(p)] = t.psi[i]; break;
            default: out[static_cast<Eigen::Index>(p)] = t.phi[static_cast<Eigen::Index>(offdiag_index(d.i, d.j))]; break;
        }
    }
    return out;
}

namespace {

// y_j = mu_j + sum_{i<j} phi_ij (y_i - mu_i) + sqrt(psi_j) eps_j
Eigen::VectorXd autoregress(const Eigen::VectorXd& mu, const ModifiedCholParams& p, const Eigen::VectorXd& eps) {
    const auto k = mu.size();
    Eigen::VectorXd dev(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        double v = std::sqrt(p.psi()[j]) * eps[j];
        for (Eigen::Index i = 0; i < j; ++i) {
            v += p.phi()[static_cast<Eigen::Index>(offdiag_index(static_cast<std::size_t>(i), static_cast<std::size_t>(j)))] * dev[i];
        }
        dev[j] = v;
    }
    return mu + dev;
}

}  // namespace

DataTable generate(const SimConfig& cfg) {
    validate(cfg);
    const auto n = static_cast<Eigen::Index>(cfg.n);
    const auto k = static_cast<Eigen::Index>(cfg.k);
    Rng rng(cfg.seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Eigen::VectorXd x(n);
    for (Eigen::Index r = 0; r < n; ++r) x[r] = unif(rng);
    Eigen::MatrixXd eps(n, k);
    for (Eigen::Index c = 0; c < k; ++c) fill_normal(rng, eps.col(c));

    Eigen::MatrixXd y(n, k);
    for (Eigen::Index r = 0; r < n; ++r) {
        const TrueParams t = true_params(x[r], cfg.k, cfg.alpha);
        y.row(r) = autoregress(t.mu, t.modified(), eps.row(r).transpose()).transpose();
    }
    DataTable table;
    table.add_column("x", x);
    for (Eigen::Index c = 0; c < k; ++c) table.add_column("y" + std::to_string(c + 1), y.col(c));
    return table;
}

DataTable truth_table(const SimConfig& cfg, std::size_t points) {
    validate(cfg);
    if (points < 2) throw invalid_parameter("truth grid needs at least 2 points");
    const auto m = static_cast<Eigen::Index>(points);
    const std::size_t k = cfg.k;
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(m, -1.0, 1.0);
    Eigen::MatrixXd vals(m, static_cast<Eigen::Index>(2 * k + offdiag_count(k)));
    for (Eigen::Index r = 0; r < m; ++r) {
        const TrueParams t = true_params(x[r], k, cfg.alpha);
        vals.row(r) << t.mu.transpose(), t.psi.transpose(), t.phi.transpose();
    }
    DataTable table;
    table.add_column("x", x);
    Eigen::Index c = 0;
    for (std::size_t i = 1; i <= k; ++i) table.add_column("mu_" + std::to_string(i), vals.col(c++));
    for (std::size_t i = 1; i <= k; ++i) table.add_column("psi_" + std::to_string(i), vals.col(c++));
    for (std::size_t j = 1; j < k; ++j) {
        for (std::size_t i = 0; i < j; ++i) {
            table.add_column("phi_" + std::to_string(i + 1) + "_" + std::to_string(j + 1),
                             vals.col(static_cast<Eigen::Index>(2 * k + offdiag_index(i, j))));
        }
    }
    return table;
}

namespace {

constexpr std::size_t weather_dim = 10;
constexpr double year_length = 365.25;

// Valid hour (UTC) of lead i: leads run from +186 h in 6 h steps.
int lead_hour(std::size_t i) { return static_cast<int>((186 + 6 * i) % 24); }

double climatology(double season, std::size_t i) {
    const double diurnal = std::cos(2.0 * std::numbers::pi * (lead_hour(i) - 14) / 24.0);
    return 8.0 - 9.0 * std::cos(season - 0.35) + 3.0 * diurnal;
}

}  // namespace

WeatherTruth weather_truth(double yday, const Eigen::VectorXd& mean, const Eigen::VectorXd& logsd) {
    const double s = 2.0 * std::numbers::pi * yday / year_length;
    const double fall = std::pow(0.5 * (1.0 + std::cos(s - 2.0 * std::numbers::pi * 290.0 / year_length)), 2);
    const auto k = static_cast<Eigen::Index>(weather_dim);
    Eigen::VectorXd mu(k), psi(k);
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(offdiag_count(weather_dim)));
    for (std::size_t i = 0; i < weather_dim; ++i) {
        const auto e = static_cast<Eigen::Index>(i);
        const double diurnal = std::cos(2.0 * std::numbers::pi * (lead_hour(i) - 14) / 24.0);
        mu[e] = 0.4 * climatology(s, i) + 0.6 * mean[e];
        psi[e] = std::exp(0.8 + 0.35 * std::cos(s) + 0.15 * diurnal + 0.1 * logsd[e]);
        if (i + 1 < weather_dim) {
            double lag1 = 0.55 + 0.25 * std::cos(s);
            if (lead_hour(i) == 6) lag1 -= 0.5 * fall;
            phi[static_cast<Eigen::Index>(offdiag_index(i, i + 1))] = lag1;
        }
        if (i + 4 < weather_dim) {
            phi[static_cast<Eigen::Index>(offdiag_index(i, i + 4))] = 0.05 + 0.45 * (1.0 - std::cos(s)) / 2.0;
        }
    }
    return {mu, ModifiedCholParams(psi, phi)};
}

DataTable generate_weather_analog(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw invalid_parameter("n must be positive");
    const auto rows = static_cast<Eigen::Index>(n);
    const auto k = static_cast<Eigen::Index>(weather_dim);
    Rng rng(seed);
    std::normal_distribution<double> normal;

    Eigen::VectorXd date(rows), yday(rows);
    Eigen::MatrixXd mean(rows, k), logsd(rows, k), obs(rows, k);
    const double span = 5.0 * year_length;
    for (Eigen::Index t = 0; t < rows; ++t) {
        date[t] = std::round(static_cast<double>(t) * std::round(span) / static_cast<double>(n));
        yday[t] = std::fmod(date[t], year_length);
        const double s = 2.0 * std::numbers::pi * yday[t] / year_length;
        double anomaly = 3.0 * normal(rng);
        for (Eigen::Index i = 0; i < k; ++i) {
            if (i > 0) anomaly = 0.9 * anomaly + 3.0 * std::sqrt(1.0 - 0.81) * normal(rng);
            mean(t, i) = climatology(s, static_cast<std::size_t>(i)) + anomaly + 0.5 * normal(rng);
            logsd(t, i) = std::log(1.2 + 0.08 * static_cast<double>(i)) + 0.25 * normal(rng);
        }
        const WeatherTruth truth = weather_truth(yday[t], mean.row(t).transpose(), logsd.row(t).transpose());
        Eigen::VectorXd eps(k);
        for (Eigen::Index i = 0; i < k; ++i) eps[i] = normal(rng);
        obs.row(t) = autoregress(truth.mu, truth.params, eps).transpose();
    }

    DataTable table;
    table.add_column("date", date);
    table.add_column("yday", yday);
    for (Eigen::Index i = 0; i < k; ++i) table.add_column("mean_" + std::to_string(i + 1), mean.col(i));
    for (Eigen::Index i = 0; i < k; ++i) table.add_column("logsd_" + std::to_string(i + 1), logsd.col(i));
    for (Eigen::Index i = 0; i < k; ++i) table.add_column("obs_" + std::to_string(i + 1), obs.col(i));
    return table;
}

}  // namespace cholgauss
