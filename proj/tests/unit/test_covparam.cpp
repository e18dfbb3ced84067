#include <doctest.h>

#include "cholgauss/covparam.hpp"
#include "cholgauss/errors.hpp"
#include "cholgauss/random.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace cholgauss;

namespace {

Eigen::VectorXd normals(Rng& rng, Eigen::Index n, double sd = 1.0) {
    Eigen::VectorXd v(n);
    fill_normal(rng, v);
    return sd * v;
}

ModifiedCholParams random_modified(Rng& rng, std::size_t k) {
    Eigen::VectorXd psi = normals(rng, static_cast<Eigen::Index>(k), 0.5).array().exp();
    Eigen::VectorXd phi = normals(rng, static_cast<Eigen::Index>(offdiag_count(k)), 0.4);
    return {psi, phi};
}

// Dense T (unit lower, -phi below the diagonal) and D from the definition.
Eigen::MatrixXd dense_precision(const ModifiedCholParams& p) {
    const auto k = static_cast<Eigen::Index>(p.dim());
    Eigen::MatrixXd t = Eigen::MatrixXd::Identity(k, k);
    for (Eigen::Index j = 1; j < k; ++j)
        for (Eigen::Index i = 0; i < j; ++i)
            t(j, i) = -p.phi()[static_cast<Eigen::Index>(offdiag_index(static_cast<std::size_t>(i), static_cast<std::size_t>(j)))];
    return t.transpose() * p.psi().cwiseInverse().asDiagonal() * t;
}

}  // namespace

TEST_CASE("offdiag index enumerates pairs column by column") {
    CHECK(offdiag_index(0, 1) == 0);
    CHECK(offdiag_index(0, 2) == 1);
    CHECK(offdiag_index(1, 2) == 2);
    CHECK(offdiag_index(0, 3) == 3);
    CHECK(offdiag_index(2, 3) == 5);
    CHECK(offdiag_count(10) == 45);
}

TEST_CASE("modified parameters reproduce the dense precision") {
    Rng rng(11);
    for (std::size_t k : {1u, 2u, 3u, 5u, 10u}) {
        const auto p = random_modified(rng, k);
        const CovarianceMatrix s = sigma_from_modified(p);
        const Eigen::MatrixXd prec = dense_precision(p);
        CHECK((s.precision() - prec).cwiseAbs().maxCoeff() < 1e-10 * (1.0 + prec.cwiseAbs().maxCoeff()));
        const Eigen::MatrixXd inv = prec.inverse();
        CHECK((s.matrix() - inv).cwiseAbs().maxCoeff() < 1e-9 * (1.0 + inv.cwiseAbs().maxCoeff()));
        CHECK(s.log_det() == doctest::Approx(std::log(inv.determinant())).epsilon(1e-10));
        CHECK((s.cholesky() * s.cholesky().transpose() - s.matrix()).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("basic factor is the inverse Cholesky factor") {
    Rng rng(12);
    for (std::size_t k : {1u, 2u, 4u, 10u}) {
        Eigen::VectorXd diag = normals(rng, static_cast<Eigen::Index>(k), 0.3).array().exp();
        Eigen::VectorXd off = normals(rng, static_cast<Eigen::Index>(offdiag_count(k)), 0.5);
        const InverseCholFactor f(diag, off);
        const Eigen::MatrixXd linv = f.inverse_factor();
        CHECK(linv.isLowerTriangular());
        const Eigen::MatrixXd l = linv.inverse();
        const CovarianceMatrix s = sigma_from_basic(f);
        CHECK((s.matrix() - l * l.transpose()).cwiseAbs().maxCoeff() < 1e-9 * (1.0 + s.matrix().cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("conversions between the two parameterizations round trip") {
    Rng rng(13);
    for (int rep = 0; rep < 50; ++rep) {
        const auto p = random_modified(rng, 6);
        const auto b = modified_to_basic(p);
        const auto back = basic_to_modified(b);
        CHECK((back.psi() - p.psi()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((back.phi() - p.phi()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((sigma_from_basic(b).matrix() - sigma_from_modified(p).matrix()).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("autoregressive simulation matches the modified covariance") {
    Rng rng(14);
    const auto p = random_modified(rng, 4);
    const Eigen::MatrixXd sigma = sigma_from_modified(p).matrix();
    const int n = 200000;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(4, 4);
    Eigen::VectorXd y(4), eps(4);
    for (int r = 0; r < n; ++r) {
        fill_normal(rng, eps);
        for (Eigen::Index j = 0; j < 4; ++j) {
            double v = std::sqrt(p.psi()[j]) * eps[j];
            for (Eigen::Index i = 0; i < j; ++i) v += p.phi_at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) * y[i];
            y[j] = v;
        }
        acc += y * y.transpose();
    }
    acc /= n;
    for (Eigen::Index i = 0; i < 4; ++i)
        for (Eigen::Index j = 0; j < 4; ++j) {
            const double se = std::sqrt((sigma(i, i) * sigma(j, j) + sigma(i, j) * sigma(i, j)) / n);
            CHECK(std::abs(acc(i, j) - sigma(i, j)) < 5.0 * se);
        }
}

TEST_CASE("antedependence masks give banded factors") {
    Rng rng(15);
    const ADMask mask(6, 2);
    CHECK(mask.active(0, 2));
    CHECK_FALSE(mask.active(0, 3));
    CHECK(mask.active_count() == 9);
    CHECK(mask.masked_count() == 6);
    CHECK(ADMask(10, 5).masked_count() == 10);
    CHECK(ADMask(10).masked_count() == 0);

    const auto p = apply_ad_mask(random_modified(rng, 6), mask);
    for (std::size_t j = 0; j < 6; ++j)
        for (std::size_t i = 0; i < j; ++i)
            if (j - i > 2) CHECK(p.phi_at(i, j) == 0.0);
    // Precision of an order-r antedependence model has bandwidth r.
    const Eigen::MatrixXd prec = sigma_from_modified(p).precision();
    for (Eigen::Index i = 0; i < 6; ++i)
        for (Eigen::Index j = 0; j < 6; ++j)
            if (std::abs(i - j) > 2) CHECK(std::abs(prec(i, j)) < 1e-10);
}

TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS_AS(InverseCholFactor(Eigen::Vector2d(1.0, 0.0), Eigen::VectorXd::Zero(1)), invalid_parameter);
    CHECK_THROWS_AS(ModifiedCholParams(Eigen::Vector2d(1.0, -1.0), Eigen::VectorXd::Zero(1)), invalid_parameter);
    CHECK_THROWS_AS(sigma_from_ar1(Eigen::Vector2d(1.0, 1.0), 1.0), invalid_parameter);
    Eigen::MatrixXd bad(3, 3);
    bad << 1, 0.9, -0.9, 0.9, 1, 0.9, -0.9, 0.9, 1;
    CHECK_THROWS_AS(sigma_from_const_corr(Eigen::Vector3d::Ones(), bad), invalid_parameter);
    Eigen::MatrixXd asym(2, 2);
    asym << 1, 0.5, 0.2, 1;
    CHECK_THROWS(CovarianceMatrix::from_matrix(asym));
}

TEST_CASE("reference structures and correlation extraction") {
    const Eigen::Vector3d sds(1.0, 2.0, 0.5);
    const CovarianceMatrix ar = sigma_from_ar1(sds, 0.6);
    CHECK(ar(0, 2) == doctest::Approx(0.36 * 0.5));
    const VarianceCorrelation vc = correlation_from_sigma(ar);
    CHECK(vc.variances[1] == doctest::Approx(4.0));
    CHECK(vc.correlation(0, 1) == doctest::Approx(0.6));
    CHECK(vc.correlation(0, 2) == doctest::Approx(0.36));
}
