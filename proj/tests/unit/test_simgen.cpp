#include <doctest.h>

#include "cholgauss/covparam.hpp"
#include "cholgauss/errors.hpp"
#include "cholgauss/simgen.hpp"

#include <Eigen/Dense>

#include <cmath>

using namespace cholgauss;

TEST_CASE("trivariate truth") {
    const TrueParams t = true_params(0.5, 3, 1.0);
    CHECK(t.mu[0] == 1.0);
    CHECK(t.mu[1] == doctest::Approx(1.5));
    CHECK(t.mu[2] == doctest::Approx(1.25));
    CHECK(t.psi[0] == doctest::Approx(std::exp(-2.0)));
    CHECK(t.psi[1] == doctest::Approx(std::exp(-1.5)));
    CHECK(t.psi[2] == doctest::Approx(std::exp(-1.75)));
    CHECK(t.phi[offdiag_index(0, 1)] == doctest::Approx(1.25 / 4));
    CHECK(t.phi[offdiag_index(0, 2)] == 0.0);
    CHECK(t.phi[offdiag_index(1, 2)] == doctest::Approx(3.5 / 4));

    const TrueParams lin = true_params(0.5, 3, 0.0);
    CHECK(lin.mu[2] == 1.0);
    CHECK(lin.phi[offdiag_index(0, 1)] == doctest::Approx(0.25));
}

TEST_CASE("zero lag-two autoregression gives the product correlation") {
    for (int i = 0; i <= 200; ++i) {
        const double x = -1.0 + i / 100.0;
        const TrueParams t = true_params(x, 3, 1.0);
        const auto vc = correlation_from_sigma(sigma_from_modified(t.modified()));
        const auto& r = vc.correlation;
        CHECK(std::abs(r(0, 2) - r(0, 1) * r(1, 2)) < 1e-12);
    }
}

TEST_CASE("higher dimensions repeat the pattern with lag-one dependence") {
    const TrueParams t = true_params(0.3, 10, 1.0);
    const TrueParams s = true_params(0.3, 3, 1.0);
    for (Eigen::Index i = 0; i < 10; ++i) {
        CHECK(t.mu[i] == s.mu[i % 3]);
        CHECK(t.psi[i] == s.psi[i % 3]);
    }
    for (std::size_t j = 1; j < 10; ++j)
        for (std::size_t i = 0; i + 1 < j; ++i) CHECK(t.phi[static_cast<Eigen::Index>(offdiag_index(i, j))] == 0.0);
}

TEST_CASE("configuration validation") {
    CHECK_THROWS_AS(validate({.n = 10, .k = 4}), invalid_parameter);
    CHECK_THROWS_AS(validate({.n = 10, .k = 3, .alpha = -1.0}), invalid_parameter);
    CHECK_THROWS_AS(validate({.n = 0, .k = 3}), invalid_parameter);
    CHECK_NOTHROW(validate({.n = 10, .k = 15}));
}

TEST_CASE("standardized simulated responses are white noise") {
    const SimConfig cfg{.n = 40000, .k = 3, .alpha = 1.0, .seed = 51};
    const DataTable d = generate(cfg);
    CHECK(d.names() == std::vector<std::string>{"x", "y1", "y2", "y3"});
    CHECK(d.column("x").minCoeff() >= -1.0);
    CHECK(d.column("x").maxCoeff() <= 1.0);
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    Eigen::Matrix3d outer = Eigen::Matrix3d::Zero();
    for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(d.rows()); ++r) {
        const TrueParams t = true_params(d.column("x")[r], 3, 1.0);
        const CovarianceMatrix s = sigma_from_modified(t.modified());
        const Eigen::Vector3d y(d.column("y1")[r], d.column("y2")[r], d.column("y3")[r]);
        const Eigen::Vector3d z = s.cholesky().triangularView<Eigen::Lower>().solve(y - t.mu);
        sum += z;
        outer += z * z.transpose();
    }
    const double n = static_cast<double>(d.rows());
    CHECK((sum / n).cwiseAbs().maxCoeff() < 4.0 / std::sqrt(n));
    CHECK((outer / n - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 0.03);
}

TEST_CASE("common random numbers across dimensions and nonlinearity") {
    const DataTable a = generate({.n = 100, .k = 3, .alpha = 1.0, .seed = 52});
    const DataTable b = generate({.n = 100, .k = 5, .alpha = 1.0, .seed = 52});
    const DataTable c = generate({.n = 100, .k = 3, .alpha = 0.0, .seed = 52});
    for (const char* col : {"x", "y1", "y2", "y3"}) CHECK((a.column(col) - b.column(col)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.column("x") - c.column("x")).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.column("y1") - c.column("y1")).cwiseAbs().maxCoeff() == 0.0);
    const DataTable a2 = generate({.n = 100, .k = 3, .alpha = 1.0, .seed = 52});
    CHECK((a.column("y3") - a2.column("y3")).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("truth table on the x grid") {
    const DataTable t = truth_table({.n = 10, .k = 3, .alpha = 1.0}, 21);
    CHECK(t.rows() == 21);
    CHECK(t.cols() == 1 + 3 + 3 + 3);
    CHECK(t.column("x")[0] == -1.0);
    CHECK(t.column("x")[20] == 1.0);
    CHECK(t.column("phi_2_3")[20] == doctest::Approx(1.0));
    CHECK(t.column("phi_1_3").cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("weather analog layout") {
    const DataTable w = generate_weather_analog(400, 3);
    CHECK(w.rows() == 400);
    CHECK(w.cols() == 32);
    for (int i = 1; i <= 10; ++i) {
        CHECK(w.has("mean_" + std::to_string(i)));
        CHECK(w.has("logsd_" + std::to_string(i)));
        CHECK(w.has("obs_" + std::to_string(i)));
        CHECK(w.column("obs_" + std::to_string(i)).allFinite());
    }
    CHECK(w.column("yday").minCoeff() >= 0.0);
    CHECK(w.column("yday").maxCoeff() < 365.25);
    const Eigen::VectorXd& date = w.column("date");
    for (Eigen::Index r = 1; r < date.size(); ++r) CHECK(date[r] >= date[r - 1]);

    const WeatherTruth t = weather_truth(100.0, Eigen::VectorXd::Constant(10, 12.0), Eigen::VectorXd::Zero(10));
    const CovarianceMatrix s = sigma_from_modified(t.params);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.matrix());
    CHECK(es.eigenvalues().minCoeff() > 0.0);
}
