#include <doctest.h>

#include "cholgauss/basis.hpp"
#include "cholgauss/data_table.hpp"
#include "cholgauss/errors.hpp"
#include "cholgauss/model_spec.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <vector>

using namespace cholgauss;

namespace {

Eigen::VectorXd values_at(const SplineBasis& b, double x) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(b.size()));
    (void)b.eval(x, {v.data(), b.size()});
    return v;
}

DataTable table(std::initializer_list<std::pair<std::string, Eigen::VectorXd>> cols) {
    DataTable t;
    for (const auto& [name, v] : cols) t.add_column(name, v);
    return t;
}

}  // namespace

TEST_CASE("open B-splines form a partition of unity on the data range") {
    const SplineBasis b = SplineBasis::open(-1.0, 2.0, 10);
    for (int i = 0; i <= 300; ++i) {
        const double x = -1.0 + 3.0 * i / 300.0;
        const Eigen::VectorXd v = values_at(b, x);
        CHECK(v.sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(v.minCoeff() >= -1e-15);
    }
}

TEST_CASE("open B-splines reproduce linear functions") {
    // Greville abscissae of a uniform cubic basis are the knot averages.
    const SplineBasis b = SplineBasis::open(0.0, 1.0, 8);
    const double h = 1.0 / 5.0;
    Eigen::VectorXd coef(8);
    for (Eigen::Index j = 0; j < 8; ++j) coef[j] = 3.0 - 2.0 * (static_cast<double>(j) - 1.0) * h;
    for (double x : {0.0, 0.13, 0.5, 0.77, 1.0}) CHECK(values_at(b, x).dot(coef) == doctest::Approx(3.0 - 2.0 * x));
}

TEST_CASE("open B-splines continue linearly outside the range") {
    const SplineBasis b = SplineBasis::open(0.0, 1.0, 10);
    Eigen::VectorXd coef(10);
    for (Eigen::Index j = 0; j < 10; ++j) coef[j] = std::sin(static_cast<double>(j));
    std::vector<double> v(10);
    CHECK(b.eval(1.5, v));
    CHECK_FALSE(b.eval(0.5, v));
    const double f1 = values_at(b, 1.0).dot(coef), f2 = values_at(b, 1.5).dot(coef), f3 = values_at(b, 2.0).dot(coef);
    CHECK(f3 - f2 == doctest::Approx(f2 - f1).epsilon(1e-10));
    const double g1 = values_at(b, 0.0).dot(coef), g2 = values_at(b, -0.4).dot(coef), g3 = values_at(b, -0.8).dot(coef);
    CHECK(g3 - g2 == doctest::Approx(g2 - g1).epsilon(1e-10));
}

TEST_CASE("basis derivatives match finite differences") {
    for (const SplineBasis& b : {SplineBasis::open(0.0, 4.0, 9), SplineBasis::cyclic(365.25, 8)}) {
        const std::size_t d = b.size();
        for (double x : {0.3, 1.7, 2.2, 3.9}) {
            const double xs = b.is_cyclic() ? x * 80.0 : x;
            std::vector<double> v(d), d1(d), d2(d);
            (void)b.eval(xs, v, d1, d2);
            const double h = b.is_cyclic() ? 1e-2 : 1e-4;
            const Eigen::VectorXd up = values_at(b, xs + h), dn = values_at(b, xs - h);
            std::vector<double> d1u(d), d1d(d), tmp(d);
            (void)b.eval(xs + h, tmp, d1u);
            (void)b.eval(xs - h, tmp, d1d);
            for (std::size_t j = 0; j < d; ++j) {
                const auto jj = static_cast<Eigen::Index>(j);
                CHECK(d1[j] == doctest::Approx((up[jj] - dn[jj]) / (2 * h)).epsilon(1e-6).scale(1e-3));
                CHECK(d2[j] == doctest::Approx((d1u[j] - d1d[j]) / (2 * h)).epsilon(1e-5).scale(1e-3));
            }
        }
    }
}

TEST_CASE("cyclic basis is periodic and smooth across the wrap point") {
    const double period = 365.25;
    const SplineBasis b = SplineBasis::cyclic(period, 8);
    for (int i = 0; i <= 100; ++i) CHECK(values_at(b, period * i / 100.0).sum() == doctest::Approx(1.0).epsilon(1e-12));
    std::vector<double> v0(8), a0(8), c0(8), v1(8), a1(8), c1(8);
    (void)b.eval(0.0, v0, a0, c0);
    (void)b.eval(period, v1, a1, c1);
    for (std::size_t j = 0; j < 8; ++j) {
        CHECK(v0[j] == doctest::Approx(v1[j]).epsilon(1e-12));
        CHECK(a0[j] == doctest::Approx(a1[j]).epsilon(1e-10));
        CHECK(c0[j] == doctest::Approx(c1[j]).epsilon(1e-8));
    }
    const Eigen::VectorXd lo = values_at(b, 1e-9), hi = values_at(b, period - 1e-9);
    CHECK((lo - hi).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((values_at(b, 40.0) - values_at(b, 40.0 + 2 * period)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("difference penalties have the polynomial null space") {
    const SplineBasis open = SplineBasis::open(0.0, 1.0, 10);
    Eigen::VectorXd lin(10), quad(10);
    for (Eigen::Index j = 0; j < 10; ++j) {
        lin[j] = 2.0 + 0.5 * static_cast<double>(j);
        quad[j] = static_cast<double>(j * j);
    }
    const Eigen::MatrixXd s2 = open.penalty(2);
    CHECK((s2 * lin).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((s2 * quad).norm() > 1.0);
    CHECK(open.penalty_rank(2) == 8);
    CHECK(open.penalty_rank(1) == 9);
    CHECK((open.penalty(1) * Eigen::VectorXd::Ones(10)).cwiseAbs().maxCoeff() < 1e-12);

    const SplineBasis cyc = SplineBasis::cyclic(1.0, 8);
    const Eigen::MatrixXd sc = cyc.penalty(2);
    CHECK((sc * Eigen::VectorXd::Ones(8)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(cyc.penalty_rank(2) == 7);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sc);
    CHECK(es.eigenvalues()(0) == doctest::Approx(0.0).scale(1.0));
    CHECK(es.eigenvalues()(1) > 1e-6);
}

TEST_CASE("smooth blocks are centered and keep the linear null space") {
    const int n = 200;
    Eigen::VectorXd x(n), z(n);
    for (int i = 0; i < n; ++i) {
        x[i] = std::pow(static_cast<double>(i) / (n - 1), 1.5);
        z[i] = std::cos(i * 0.1);
    }
    const DataTable data = table({{"x", x}, {"z", z}});

    const BasisBlock sm = build_block(parse_formula("s(x, k=10)")[1], data);
    CHECK(sm.columns() == 9);
    CHECK(sm.design().colwise().sum().cwiseAbs().maxCoeff() < 1e-10);
    CHECK(sm.penalty_rank() == 8);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sm.penalty());
    CHECK(std::abs(es.eigenvalues()(0)) < 1e-10);
    CHECK(es.eigenvalues()(1) > 1e-8);

    const BasisBlock vc = build_block(parse_formula("s(x, k=8):z")[1], data);
    CHECK(vc.columns() == 8);
    CHECK(vc.constraint().size() == 0);
    // Row sums of the raw spline values are one, so the varying design sums to z.
    CHECK((vc.design().rowwise().sum() - z).cwiseAbs().maxCoeff() < 1e-12);

    const BasisBlock lin = build_block(parse_formula("x")[1], data);
    CHECK(lin.columns() == 1);
    CHECK_FALSE(lin.penalized());

    // Predicting at the training points reproduces the training design.
    CHECK((sm.design_for(data) - sm.design()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("degenerate covariates degrade with a warning") {
    const DataTable flat = table({{"x", Eigen::VectorXd::Constant(50, 3.0)}});
    const BasisBlock b = build_block(parse_formula("s(x)")[1], flat);
    CHECK(b.columns() == 0);
    CHECK_FALSE(b.warnings().empty());

    Eigen::VectorXd few(60);
    for (int i = 0; i < 60; ++i) few[i] = i % 5;
    const BasisBlock r = build_block(parse_formula("s(x, k=10)")[1], table({{"x", few}}));
    CHECK(r.columns() < 9);
    CHECK_FALSE(r.warnings().empty());
}

TEST_CASE("formula grammar") {
    const auto t = parse_formula("s(x, k=12, m=1) + cyclic(yday, period=7) + cc(yday, k=5):mean_3 + w + 1",
                                 {{"yday", 365.25}});
    REQUIRE(t.size() == 5);
    CHECK(t[0].kind == TermKind::intercept);
    CHECK(t[1].kind == TermKind::smooth);
    CHECK(t[1].basis_size == 12);
    CHECK(t[1].penalty_order == 1);
    CHECK(t[2].kind == TermKind::cyclic_smooth);
    CHECK(*t[2].period == 7.0);
    CHECK(t[3].kind == TermKind::varying_coefficient);
    CHECK(*t[3].period == 365.25);
    CHECK(t[3].basis_size == 5);
    CHECK(t[4].kind == TermKind::linear);
    CHECK(t[4].covariate == "w");
    CHECK_THROWS_AS(parse_formula("s(x"), schema_error);
    CHECK_THROWS_AS(parse_formula("cyclic(yday)"), schema_error);
}
