#include "cholgauss/estimate.hpp"

#include "cholgauss/errors.hpp"
#include "problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace cholgauss {

std::vector<double> default_smoothing_grid() {
    std::vector<double> grid;
    for (int e = -2; e <= 6; ++e) grid.push_back(std::pow(10.0, e));
    return grid;
}

Eigen::MatrixXd FitState::predictors(const DataTable& data, std::size_t* extrapolated) const {
    const auto n_rows = static_cast<Eigen::Index>(data.rows());
    Eigen::MatrixXd eta = Eigen::MatrixXd::Zero(n_rows, static_cast<Eigen::Index>(params.size()));
    for (std::size_t p = 0; p < params.size(); ++p) {
        for (const TermFit& t : params[p].terms) {
            if (t.block.columns() == 0) continue;
            eta.col(static_cast<Eigen::Index>(p)) += evaluate_term(t.block, data, t.beta, extrapolated);
        }
    }
    return eta;
}

std::vector<std::vector<double>> FitState::smoothing() const {
    std::vector<std::vector<double>> out;
    for (const ParamFit& p : params) {
        std::vector<double> row;
        for (const TermFit& t : p.terms) row.push_back(t.smoothing);
        out.push_back(std::move(row));
    }
    return out;
}

namespace detail {

Problem::Problem(const ModelSpec& s, const DataTable& data, const FitOptions& opts)
    : spec(s), options(opts), kernel(s.layout), n(data.rows()), k(s.dim), nparams(s.layout->size()) {
    if (n == 0) throw schema_error("no rows to fit");
    y = data.matrix(spec.response);
    if (!y.allFinite()) throw schema_error("response columns contain missing values");
    eta = RowMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(nparams));
    std::size_t total_columns = 0;
    for (std::size_t p = 0; p < nparams; ++p) {
        std::vector<BasisBlock> list;
        std::vector<Eigen::Index> offs;
        Eigen::Index cols = 0;
        for (const TermSpec& t : spec.terms[p]) {
            list.push_back(build_block(t, data));
            for (const auto& w : list.back().warnings()) warnings.push_back((*spec.layout)[p].name + ": " + w);
            offs.push_back(cols);
            cols += static_cast<Eigen::Index>(list.back().columns());
        }
        Eigen::MatrixXd b(static_cast<Eigen::Index>(n), cols);
        for (std::size_t t = 0; t < list.size(); ++t) {
            const auto c = static_cast<Eigen::Index>(list[t].columns());
            if (c > 0) b.middleCols(offs[t], c) = list[t].design();
        }
        total_columns += static_cast<std::size_t>(cols);
        blocks.push_back(std::move(list));
        design.push_back(std::move(b));
        offset.push_back(std::move(offs));
        beta.push_back(Eigen::VectorXd::Zero(cols));
    }
    if (n <= total_columns) {
        warnings.push_back("only " + std::to_string(n) + " rows for " + std::to_string(total_columns) +
                           " coefficients");
    }
    set_smoothing({});
    ws = kernel.workspace();
}

void Problem::set_smoothing(const std::vector<std::vector<double>>& values) {
    lambda.assign(nparams, {});
    for (std::size_t p = 0; p < nparams; ++p) {
        for (std::size_t t = 0; t < blocks[p].size(); ++t) {
            double v = blocks[p][t].penalized() ? options.initial_smoothing : 0.0;
            if (p < values.size() && t < values[p].size() && blocks[p][t].penalized()) v = values[p][t];
            if (!(v >= 0.0) || !std::isfinite(v)) throw invalid_parameter("smoothing parameters must be finite and >= 0");
            lambda[p].push_back(v);
        }
    }
}

void Problem::initialize() {
    const ParamLayout& l = *spec.layout;
    for (auto& b : beta) b.setZero();
    for (std::size_t i = 0; i < k; ++i) {
        const auto col = y.col(static_cast<Eigen::Index>(i));
        const double mean = col.mean();
        const double var = std::max((col.array() - mean).square().sum() / static_cast<double>(std::max<std::size_t>(n - 1, 1)),
                                    1e-12);
        beta[l.mean_position(i)][0] = mean;
        const std::size_t d = l.diag_position(i);
        switch (l[d].role) {
            case ParamRole::chol_diag: beta[d][0] = -0.5 * std::log(var); break;
            case ParamRole::innov_var: beta[d][0] = std::log(var); break;
            case ParamRole::sd: beta[d][0] = 0.5 * std::log(var); break;
            default: break;
        }
    }
    for (std::size_t p = 0; p < nparams; ++p) refresh_eta(p);
}

void Problem::load(const FitState& state) {
    if (state.params.size() != nparams) throw invalid_parameter("fit state does not match the model");
    for (std::size_t p = 0; p < nparams; ++p) {
        const auto& terms = state.params[p].terms;
        if (terms.size() != blocks[p].size()) throw invalid_parameter("fit state does not match the model");
        for (std::size_t t = 0; t < terms.size(); ++t) {
            const auto c = static_cast<Eigen::Index>(blocks[p][t].columns());
            if (terms[t].beta.size() != c) throw invalid_parameter("fit state coefficients do not match the data");
            if (c > 0) beta[p].segment(offset[p][t], c) = terms[t].beta;
            lambda[p][t] = terms[t].smoothing;
        }
        refresh_eta(p);
    }
}

void Problem::refresh_eta(std::size_t p) {
    eta.col(static_cast<Eigen::Index>(p)) = design[p] * beta[p];
}

double Problem::loglik() {
    CompensatedSum sum;
    const double* e = eta.data();
    const double* yy = y.data();
    for (std::size_t r = 0; r < n; ++r) {
        const double v = kernel.loglik(std::span<const double>(e + r * nparams, nparams),
                                       std::span<const double>(yy + r * k, k), ws);
        if (!std::isfinite(v)) return -std::numeric_limits<double>::infinity();
        sum.add(v);
    }
    return sum.value();
}

double Problem::penalty(std::size_t p) const {
    double total = 0.0;
    for (std::size_t t = 0; t < blocks[p].size(); ++t) {
        if (lambda[p][t] == 0.0 || !blocks[p][t].penalized()) continue;
        const auto c = static_cast<Eigen::Index>(blocks[p][t].columns());
        const auto b = beta[p].segment(offset[p][t], c);
        total += lambda[p][t] * b.dot(blocks[p][t].penalty() * b);
    }
    return total;
}

double Problem::pen_loglik() {
    double pen = 0.0;
    for (std::size_t p = 0; p < nparams; ++p) pen += penalty(p);
    return loglik() - 0.5 * pen;
}

Eigen::MatrixXd Problem::penalty_matrix(std::size_t p) const {
    const auto cols = design[p].cols();
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(cols, cols);
    for (std::size_t t = 0; t < blocks[p].size(); ++t) {
        const auto c = static_cast<Eigen::Index>(blocks[p][t].columns());
        if (c == 0 || lambda[p][t] == 0.0) continue;
        s.block(offset[p][t], offset[p][t], c, c) = lambda[p][t] * blocks[p][t].penalty();
    }
    return s;
}

void Problem::derivatives(std::size_t p, Eigen::VectorXd& g, Eigen::VectorXd& h) {
    g.resize(static_cast<Eigen::Index>(n));
    h.resize(static_cast<Eigen::Index>(n));
    const double* e = eta.data();
    const double* yy = y.data();
    for (std::size_t r = 0; r < n; ++r) {
        const auto c = kernel.coordinate(std::span<const double>(e + r * nparams, nparams),
                                         std::span<const double>(yy + r * k, k), p, ws);
        if (!std::isfinite(c.first) || !std::isfinite(c.second))
            throw numerical_failure("non-finite derivative for " + (*spec.layout)[p].name);
        g[static_cast<Eigen::Index>(r)] = c.first;
        h[static_cast<Eigen::Index>(r)] = c.second;
    }
}

void Problem::working(std::size_t p, Eigen::VectorXd& w, Eigen::VectorXd& z) {
    Eigen::VectorXd g;
    derivatives(p, g, w);
    w = (-w.array()).max(options.weight_floor);
    z = eta.col(static_cast<Eigen::Index>(p)) + (g.array() / w.array()).matrix();
}

namespace {

Eigen::VectorXd solve_spd(Eigen::MatrixXd a, const Eigen::VectorXd& rhs, double ridge, bool& ridged) {
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
        Eigen::VectorXd x = llt.solve(rhs);
        if (x.allFinite()) return x;
    }
    ridged = true;
    a.diagonal().array() += ridge;
    llt.compute(a);
    if (llt.info() == Eigen::Success) {
        Eigen::VectorXd x = llt.solve(rhs);
        if (x.allFinite()) return x;
    }
    Eigen::VectorXd x = a.completeOrthogonalDecomposition().solve(rhs);
    if (!x.allFinite()) throw numerical_failure("penalized normal equations could not be solved");
    return x;
}

}  // namespace

double Problem::iwls_step(std::size_t p, double current) {
    const Eigen::MatrixXd& b = design[p];
    if (b.cols() == 0) return current;
    Eigen::VectorXd w, z;
    working(p, w, z);
    const Eigen::MatrixXd bw = b.transpose() * w.asDiagonal();
    Eigen::MatrixXd a = bw * b + penalty_matrix(p);
    const Eigen::VectorXd rhs = bw * z;
    bool ridged = false;
    const Eigen::VectorXd proposal = solve_spd(std::move(a), rhs, options.ridge, ridged);
    if (ridged && !ridge_warned_) {
        warnings.push_back("singular penalized normal equations for " + (*spec.layout)[p].name +
                           "; ridge added");
        ridge_warned_ = true;
    }

    const Eigen::VectorXd old = beta[p];
    const Eigen::VectorXd delta = proposal - old;
    const double size = delta.cwiseAbs().maxCoeff();
    double scale = 1.0;
    bool any_finite = false;
    for (std::size_t s = 0; s <= options.max_halvings; ++s, scale *= 0.5) {
        beta[p] = old + scale * delta;
        refresh_eta(p);
        const double val = pen_loglik();
        if (std::isfinite(val)) {
            any_finite = true;
            if (val >= current) return val;
            if (scale * size < 1e-10 * (1.0 + old.cwiseAbs().maxCoeff())) break;
        }
    }
    beta[p] = old;
    refresh_eta(p);
    if (!any_finite && !std::isfinite(current))
        throw convergence_failure("non-finite likelihood for " + (*spec.layout)[p].name + " after step halving");
    if (!any_finite)
        throw convergence_failure("non-finite likelihood for " + (*spec.layout)[p].name + " after " +
                                  std::to_string(options.max_halvings) + " step halvings");
    return current;
}

std::vector<double> Problem::term_edf(std::size_t p) {
    const Eigen::MatrixXd& b = design[p];
    std::vector<double> out(blocks[p].size(), 0.0);
    if (b.cols() == 0) return out;
    Eigen::VectorXd w, z;
    working(p, w, z);
    const Eigen::MatrixXd btwb = b.transpose() * w.asDiagonal() * b;
    Eigen::MatrixXd a = btwb + penalty_matrix(p);
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) {
        a.diagonal().array() += options.ridge;
        llt.compute(a);
    }
    const Eigen::MatrixXd f = llt.solve(btwb);
    for (std::size_t t = 0; t < blocks[p].size(); ++t) {
        const auto c = static_cast<Eigen::Index>(blocks[p][t].columns());
        if (c > 0) out[t] = f.diagonal().segment(offset[p][t], c).sum();
    }
    return out;
}

FitState Problem::state(bool converged, std::size_t iterations) {
    FitState st;
    st.spec = spec;
    st.converged = converged;
    st.iterations = iterations;
    st.n = n;
    st.loglik = loglik();
    st.pen_loglik = pen_loglik();
    double edf_total = 0.0;
    for (std::size_t p = 0; p < nparams; ++p) {
        ParamFit pf{(*spec.layout)[p].name, {}};
        const std::vector<double> edf = term_edf(p);
        for (std::size_t t = 0; t < blocks[p].size(); ++t) {
            const auto c = static_cast<Eigen::Index>(blocks[p][t].columns());
            pf.terms.push_back({blocks[p][t].without_design(), beta[p].segment(offset[p][t], c), lambda[p][t], edf[t]});
            edf_total += edf[t];
        }
        st.params.push_back(std::move(pf));
    }
    st.edf = edf_total;
    st.aic = -2.0 * st.loglik + 2.0 * edf_total;
    st.warnings = warnings;
    return st;
}

namespace {

// Outer backfitting cycles until the relative change in the penalized
// log-likelihood drops below the tolerance.
std::pair<bool, std::size_t> backfit(Problem& prob) {
    double pll = prob.pen_loglik();
    if (!std::isfinite(pll)) throw convergence_failure("non-finite log-likelihood at the starting values");
    for (std::size_t it = 1; it <= prob.options.max_outer; ++it) {
        const double old = pll;
        for (std::size_t p = 0; p < prob.nparams; ++p) pll = prob.iwls_step(p, pll);
        if (std::abs(pll - old) / (std::abs(old) + 0.1) < prob.options.tolerance) return {true, it};
    }
    prob.warnings.push_back("no convergence after " + std::to_string(prob.options.max_outer) + " outer iterations");
    return {false, prob.options.max_outer};
}

void selection_pass(Problem& prob, const std::vector<double>& grid) {
    if (grid.empty()) throw invalid_parameter("smoothing grid is empty");
    for (std::size_t p = 0; p < prob.nparams; ++p) {
        for (std::size_t t = 0; t < prob.blocks[p].size(); ++t) {
            if (prob.blocks[p][t].penalized()) prob.lambda[p][t] = grid.size() == 1 ? grid[0] : prob.lambda[p][t];
        }
    }
    if (grid.size() == 1) return;

    (void)backfit(prob);
    std::vector<double> edf(prob.nparams, 0.0);
    for (std::size_t p = 0; p < prob.nparams; ++p) {
        for (double e : prob.term_edf(p)) edf[p] += e;
    }
    double edf_total = 0.0;
    for (double e : edf) edf_total += e;

    for (std::size_t p = 0; p < prob.nparams; ++p) {
        for (std::size_t t = 0; t < prob.blocks[p].size(); ++t) {
            if (!prob.blocks[p][t].penalized()) continue;
            const Eigen::VectorXd start = prob.beta[p];
            double best_aic = std::numeric_limits<double>::infinity();
            std::size_t best = 0;
            Eigen::VectorXd best_beta = start;
            double best_edf = edf[p];
            for (std::size_t g = 0; g < grid.size(); ++g) {
                prob.lambda[p][t] = grid[g];
                prob.beta[p] = start;
                prob.refresh_eta(p);
                double pll = prob.pen_loglik();
                if (!std::isfinite(pll)) continue;
                for (std::size_t it = 0; it < prob.options.selection_iterations; ++it) pll = prob.iwls_step(p, pll);
                double e = 0.0;
                for (double v : prob.term_edf(p)) e += v;
                const double aic = -2.0 * prob.loglik() + 2.0 * (edf_total - edf[p] + e);
                if (aic < best_aic) {
                    best_aic = aic;
                    best = g;
                    best_beta = prob.beta[p];
                    best_edf = e;
                }
            }
            prob.lambda[p][t] = grid[best];
            prob.beta[p] = best_beta;
            prob.refresh_eta(p);
            edf_total += best_edf - edf[p];
            edf[p] = best_edf;
            if (best == 0 || best + 1 == grid.size()) {
                prob.warnings.push_back((*prob.spec.layout)[p].name + " " + prob.blocks[p][t].spec().label() +
                                        ": smoothing selected at the grid boundary");
            }
        }
    }
}

}  // namespace

}  // namespace detail

FitState fit_pml(const ModelSpec& spec, const DataTable& data, const FitOptions& options,
                 const std::vector<std::vector<double>>* smoothing) {
    detail::Problem prob(spec, data, options);
    if (smoothing) prob.set_smoothing(*smoothing);
    prob.initialize();
    const auto [converged, iterations] = detail::backfit(prob);
    return prob.state(converged, iterations);
}

std::vector<std::vector<double>> select_smoothing(const ModelSpec& spec, const DataTable& data,
                                                  const std::vector<double>& grid, const FitOptions& options,
                                                  std::vector<std::string>* warnings) {
    detail::Problem prob(spec, data, options);
    prob.initialize();
    detail::selection_pass(prob, grid);
    if (warnings) warnings->insert(warnings->end(), prob.warnings.begin(), prob.warnings.end());
    return prob.lambda;
}

FitState fit(const ModelSpec& spec, const DataTable& data, const FitOptions& options) {
    detail::Problem prob(spec, data, options);
    prob.initialize();
    if (options.select_smoothing) detail::selection_pass(prob, options.smoothing_grid);
    const auto [converged, iterations] = detail::backfit(prob);
    return prob.state(converged, iterations);
}

}  // namespace cholgauss
