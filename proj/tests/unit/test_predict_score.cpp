#include <doctest.h>

#include "cholgauss/estimate.hpp"
#include "cholgauss/experiments.hpp"
#include "cholgauss/likelihood.hpp"
#include "cholgauss/predict.hpp"
#include "cholgauss/scoring.hpp"
#include "cholgauss/simgen.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

using namespace cholgauss;

namespace {

PredictedDistribution make_dist(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma) {
    return {mu, CovarianceMatrix::from_matrix(sigma), 0};
}

// E|m + s Z|^p by Simpson quadrature on each side of the kink at z0 = -m/s,
// with z = z0 +- t^2 so the integrand stays smooth.
double abs_moment_quadrature(double m, double s, double p) {
    const double z0 = -m / s;
    const double top = std::sqrt(14.0 + std::abs(z0));
    const int n = 20000;
    const double h = top / n;
    auto f = [&](double t) {
        double v = 0.0;
        for (double z : {z0 + t * t, z0 - t * t}) v += std::pow(std::abs(m + s * z), p) * std::exp(-0.5 * z * z);
        return 2.0 * t * v;
    };
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) acc += ((i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0)) * f(i * h);
    return acc * h / 3.0 / std::sqrt(2.0 * std::numbers::pi);
}

std::vector<std::string> ynames(std::size_t k) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back("y" + std::to_string(i + 1));
    return out;
}

}  // namespace

TEST_CASE("DSS equals the dense quadratic form and is affine in the log-likelihood") {
    Eigen::Matrix3d sigma;
    sigma << 1.5, 0.4, 0.1, 0.4, 0.8, -0.2, 0.1, -0.2, 2.0;
    const Eigen::Vector3d mu(0.3, -1.0, 2.0), y(1.0, 0.0, 0.5);
    const auto d = make_dist(mu, sigma);
    const Eigen::Vector3d r = y - mu;
    const double direct = std::log(sigma.determinant()) + r.dot(sigma.inverse() * r);
    CHECK(dss(d, y) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(std::abs(dss(d, y) + 2.0 * loglik_generic(mu, d.sigma, y) + 3.0 * log_two_pi) < 1e-10);
}

TEST_CASE("absolute moments match the closed form") {
    // E|sZ|^p = s^p 2^{p/2} Gamma((p+1)/2) / sqrt(pi)
    for (double p : {0.5, 1.0, 2.0}) {
        for (double s : {0.3, 1.0, 2.5}) {
            const double closed = std::pow(s, p) * std::pow(2.0, p / 2) * std::tgamma((p + 1) / 2) / std::sqrt(std::numbers::pi);
            CHECK(abs_moment_quadrature(0.0, s, p) == doctest::Approx(closed).epsilon(1e-6));
        }
    }
}

TEST_CASE("variogram score converges to its analytic value") {
    Eigen::Matrix2d sigma;
    sigma << 1.0, 0.3, 0.3, 2.0;
    const double s = std::sqrt(1.0 + 2.0 - 0.6);
    const Eigen::Vector2d y(2.5, -1.1);
    for (const Eigen::Vector2d& mu : {Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(1.0, -0.5)}) {
        const auto d = make_dist(mu, sigma);
        const double e = abs_moment_quadrature(mu[0] - mu[1], s, 0.5);
        const double exact = std::pow(std::pow(std::abs(y[0] - y[1]), 0.5) - e, 2);
        const double mc = variogram_score(d, y, 0.5, 200000, 3);
        CHECK(mc == doctest::Approx(exact).epsilon(0.02));
    }
    const auto d = make_dist(Eigen::Vector2d::Zero(), sigma);
    CHECK(variogram_score(d, y, 0.5, 500, 9) == variogram_score(d, y, 0.5, 500, 9));
}

TEST_CASE("simulated draws have the predicted moments") {
    Eigen::Matrix3d sigma;
    sigma << 1.0, 0.5, 0.2, 0.5, 2.0, 0.3, 0.2, 0.3, 0.7;
    const Eigen::Vector3d mu(1.0, 2.0, 3.0);
    const Eigen::MatrixXd draws = simulate(make_dist(mu, sigma), 100000, 4);
    const Eigen::VectorXd mean = draws.colwise().mean().transpose();
    const Eigen::MatrixXd c = draws.rowwise() - mean.transpose();
    const Eigen::MatrixXd cov = c.transpose() * c / 100000.0;
    CHECK((mean - mu).cwiseAbs().maxCoeff() < 0.03);
    CHECK((cov - sigma).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("year-month labels") {
    Eigen::VectorXd days(5);
    days << 0, 30, 31, 365, 1825;
    const auto labels = year_month_labels(days);
    CHECK(labels[0] == "2010-01");
    CHECK(labels[1] == "2010-01");
    CHECK(labels[2] == "2010-02");
    CHECK(labels[3] == "2011-01");
    CHECK(labels[4] == "2014-12");
}

TEST_CASE("folds partition the rows") {
    for (FoldScheme scheme : {FoldScheme::random, FoldScheme::contiguous}) {
        const auto folds = make_folds(103, 5, scheme, 8);
        REQUIRE(folds.size() == 5);
        std::vector<int> seen(103, 0);
        for (const auto& f : folds) {
            CHECK(f.test.size() >= 20);
            CHECK(f.test.size() <= 21);
            CHECK(f.train.size() + f.test.size() == 103);
            const std::set<std::size_t> train(f.train.begin(), f.train.end());
            for (std::size_t r : f.test) {
                ++seen[r];
                CHECK(train.count(r) == 0);
            }
        }
        CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
    }
}

TEST_CASE("cross-validation never sees the held-out rows") {
    DataTable data = generate({.n = 250, .k = 3, .alpha = 1.0, .seed = 41});
    const ModelSpec spec = uniform_spec(Family::modified_chol, 3, std::nullopt, "x", ynames(3));
    CvOptions o;
    o.seed = 3;
    o.score.vs_draws = 50;
    const auto folds = make_folds(data.rows(), o.folds, o.scheme, o.seed);

    // Corrupt the responses of fold 0's test rows.
    DataTable bad;
    for (std::size_t c = 0; c < data.cols(); ++c) {
        Eigen::VectorXd v = data.column(c);
        if (data.names()[c] != "x")
            for (std::size_t r : folds[0].test) v[static_cast<Eigen::Index>(r)] += 100.0;
        bad.add_column(data.names()[c], v);
    }
    const ScorePanel panel = kfold_cv(spec, bad, o);
    CHECK(panel.failed_folds.empty());
    CHECK(panel.size() == 250);

    // Fold 0 was fit on clean rows only, so a manual fit on its training rows
    // scores the corrupted test rows identically.
    const FitState manual = fit(spec, data.select_rows(folds[0].train), o.fit);
    const ScorePanel ref = score_rows(manual, bad, folds[0].test, o.score);
    std::size_t matched = 0;
    for (std::size_t i = 0; i < panel.size(); ++i) {
        if (panel.fold[i] != 1) continue;
        const auto it = std::find(ref.row.begin(), ref.row.end(), panel.row[i]);
        REQUIRE(it != ref.row.end());
        CHECK(panel.dss[i] == doctest::Approx(ref.dss[static_cast<std::size_t>(it - ref.row.begin())]).epsilon(1e-12));
        ++matched;
    }
    CHECK(matched == folds[0].test.size());
}

TEST_CASE("scored rows satisfy the DSS identity and group means") {
    const DataTable data = generate({.n = 200, .k = 3, .alpha = 1.0, .seed = 42});
    const ModelSpec spec = uniform_spec(Family::basic_chol, 3, std::nullopt, "x", ynames(3));
    const FitState st = fit(spec, data);
    std::vector<std::size_t> rows(200);
    for (std::size_t i = 0; i < 200; ++i) rows[i] = i;
    std::vector<std::string> groups(200);
    for (std::size_t i = 0; i < 200; ++i) groups[i] = i < 50 ? "a" : "b";
    ScoreOptions so;
    so.vs_draws = 100;
    const ScorePanel p = score_rows(st, data, rows, so, 0, &groups);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(std::abs(p.dss[i] + 2.0 * p.loglik[i] + 3.0 * log_two_pi) < 1e-10);
    const auto g = mean_by_group(p);
    CHECK(g.at("a").count == 50);
    CHECK(g.at("b").count == 150);
    const ScoreMeans all = overall_mean(p);
    CHECK(all.dss == doctest::Approx((50 * g.at("a").dss + 150 * g.at("b").dss) / 200));
    // Average log-likelihood of the training rows equals the fitted total.
    CHECK(all.loglik * 200 == doctest::Approx(st.loglik).epsilon(1e-9));
}

TEST_CASE("a reference model compared with itself has zero differences") {
    const DataTable data = generate_weather_analog(120, 5);
    nlohmann::json doc{{"name", "ref"}, {"family", "modified_chol"}, {"k", 10}, {"ad_order", 1}, {"response", "obs_[i]"}};
    const ModelSpec ref = parse_model_spec(doc);
    doc["name"] = "copy";
    const ModelSpec copy = parse_model_spec(doc);
    CvOptions o;
    o.score.vs_draws = 20;
    const ModelComparison cmp = model_compare({ref, copy}, data, o, "ref");
    std::ostringstream groups, folds;
    write_group_csv(groups, cmp);
    write_fold_csv(folds, cmp);

    auto fields = [](const std::string& line) {
        std::vector<std::string> out;
        std::stringstream ss(line);
        for (std::string f; std::getline(ss, f, ',');) out.push_back(f);
        return out;
    };
    std::istringstream gin(groups.str());
    std::string line;
    std::getline(gin, line);
    CHECK(line == "model,group,count,dss,vs,loglik,dss_diff,vs_diff");
    std::size_t cells = 0;
    while (std::getline(gin, line)) {
        const auto f = fields(line);
        REQUIRE(f.size() == 8);
        CHECK(std::stod(f[6]) == 0.0);
        CHECK(std::stod(f[7]) == 0.0);
        ++cells;
    }
    CHECK(cells >= 2);
    std::istringstream fin(folds.str());
    std::getline(fin, line);
    std::set<std::string> labels;
    while (std::getline(fin, line)) labels.insert(fields(line)[1]);
    CHECK(labels.size() == 5);
}
