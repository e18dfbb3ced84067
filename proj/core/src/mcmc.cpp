#include "cholgauss/mcmc.hpp"

#include "cholgauss/errors.hpp"
#include "cholgauss/random.hpp"
#include "problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cholgauss {

Eigen::VectorXd ChainState::coefficients(std::size_t draw, std::size_t param, std::size_t term) const {
    for (const McmcBlock& b : blocks) {
        if (b.param == param && b.term == term)
            return samples.row(static_cast<Eigen::Index>(draw)).segment(b.offset, b.size).transpose();
    }
    return base.params.at(param).terms.at(term).beta;
}

Eigen::VectorXd ChainState::trace(std::size_t param, std::size_t term, Eigen::Index coefficient) const {
    for (const McmcBlock& b : blocks) {
        if (b.param == param && b.term == term) return samples.col(b.offset + coefficient);
    }
    throw invalid_parameter("no sampled block for this term");
}

FitState ChainState::draw(std::size_t d) const {
    FitState st = base;
    for (const McmcBlock& b : blocks) st.params[b.param].terms[b.term].beta = coefficients(d, b.param, b.term);
    return st;
}

namespace {

struct Proposal {
    Eigen::VectorXd mean;
    Eigen::LLT<Eigen::MatrixXd> precision;
    double half_log_det = 0.0;
};

// Normal approximation of the block's full conditional at the current state.
Proposal build_proposal(detail::Problem& prob, std::size_t p, Eigen::Index off, Eigen::Index size,
                        const Eigen::MatrixXd& s_scaled) {
    Eigen::VectorXd w, z;
    prob.working(p, w, z);
    const auto b = prob.design[p].middleCols(off, size);
    z -= prob.eta.col(static_cast<Eigen::Index>(p)) - b * prob.beta[p].segment(off, size);
    const Eigen::MatrixXd bw = b.transpose() * w.asDiagonal();
    Eigen::MatrixXd prec = bw * b + s_scaled;
    Proposal out;
    out.precision.compute(prec);
    if (out.precision.info() != Eigen::Success) {
        prec.diagonal().array() += prob.options.ridge;
        out.precision.compute(prec);
        if (out.precision.info() != Eigen::Success) throw numerical_failure("proposal precision is not positive definite");
    }
    out.mean = out.precision.solve(bw * z);
    out.half_log_det = out.precision.matrixLLT().diagonal().array().log().sum();
    return out;
}

double log_density(const Proposal& q, const Eigen::VectorXd& x) {
    const Eigen::VectorXd d = x - q.mean;
    const Eigen::VectorXd u = q.precision.matrixU() * d;
    return q.half_log_det - 0.5 * u.squaredNorm();
}

}  // namespace

ChainState fit_mcmc(const FitState& start, const DataTable& data, const McmcOptions& options) {
    if (options.thin == 0) throw invalid_parameter("thinning must be positive");
    if (options.burnin >= options.iterations) throw invalid_parameter("burn-in must be shorter than the chain");
    detail::Problem prob(start.spec, data, FitOptions{});
    prob.load(start);

    ChainState chain;
    chain.base = start;
    Eigen::Index total = 0;
    for (std::size_t p = 0; p < prob.nparams; ++p) {
        for (std::size_t t = 0; t < prob.blocks[p].size(); ++t) {
            const auto c = static_cast<Eigen::Index>(prob.blocks[p][t].columns());
            if (c == 0) continue;
            chain.blocks.push_back({p, t, total, c, prob.blocks[p][t].penalized()});
            total += c;
        }
    }
    const std::size_t nblocks = chain.blocks.size();
    const std::size_t saved = (options.iterations - options.burnin + options.thin - 1) / options.thin;
    chain.samples.resize(static_cast<Eigen::Index>(saved), total);
    chain.tau2 = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(saved), static_cast<Eigen::Index>(nblocks),
                                           std::numeric_limits<double>::quiet_NaN());

    std::vector<double> tau2(nblocks, 1.0);
    for (std::size_t b = 0; b < nblocks; ++b) {
        const double lam = prob.lambda[chain.blocks[b].param][chain.blocks[b].term];
        if (chain.blocks[b].penalized && lam > 0.0) tau2[b] = 1.0 / lam;
    }
    std::vector<std::size_t> accepted(nblocks, 0), accepted_burn(nblocks, 0);

    Rng rng(options.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double ll = prob.loglik();
    if (!std::isfinite(ll)) throw convergence_failure("non-finite log-likelihood at the sampler start");

    std::size_t row = 0;
    for (std::size_t it = 0; it < options.iterations; ++it) {
        for (std::size_t bi = 0; bi < nblocks; ++bi) {
            const McmcBlock& blk = chain.blocks[bi];
            const std::size_t p = blk.param;
            const Eigen::Index off = prob.offset[p][blk.term];
            const BasisBlock& basis = prob.blocks[p][blk.term];
            const Eigen::MatrixXd s_scaled =
                blk.penalized ? Eigen::MatrixXd(basis.penalty() / tau2[bi])
                              : Eigen::MatrixXd::Zero(blk.size, blk.size);

            const Eigen::VectorXd current = prob.beta[p].segment(off, blk.size);
            const Proposal fwd = build_proposal(prob, p, off, blk.size, s_scaled);
            Eigen::VectorXd eps(blk.size);
            fill_normal(rng, eps);
            const Eigen::VectorXd cand = fwd.mean + fwd.precision.matrixU().solve(eps);

            prob.beta[p].segment(off, blk.size) = cand;
            prob.refresh_eta(p);
            const double ll_cand = prob.loglik();
            bool accept = false;
            if (std::isfinite(ll_cand)) {
                const Proposal rev = build_proposal(prob, p, off, blk.size, s_scaled);
                const double prior_cur = -0.5 * current.dot(s_scaled * current);
                const double prior_cand = -0.5 * cand.dot(s_scaled * cand);
                const double log_alpha = ll_cand + prior_cand - ll - prior_cur + log_density(rev, current) -
                                         log_density(fwd, cand);
                accept = std::log(unif(rng)) < log_alpha;
            } else {
                (void)unif(rng);
            }
            if (accept) {
                ll = ll_cand;
                ++(it < options.burnin ? accepted_burn[bi] : accepted[bi]);
            } else {
                prob.beta[p].segment(off, blk.size) = current;
                prob.refresh_eta(p);
            }

            if (blk.penalized) {
                const Eigen::VectorXd beta = prob.beta[p].segment(off, blk.size);
                const double shape = options.prior_a + 0.5 * static_cast<double>(basis.penalty_rank());
                const double rate = options.prior_b + 0.5 * beta.dot(basis.penalty() * beta);
                std::gamma_distribution<double> gamma(shape, 1.0 / rate);
                tau2[bi] = 1.0 / gamma(rng);
            }
        }
        if (it >= options.burnin && (it - options.burnin) % options.thin == 0) {
            for (std::size_t bi = 0; bi < nblocks; ++bi) {
                const McmcBlock& blk = chain.blocks[bi];
                chain.samples.row(static_cast<Eigen::Index>(row)).segment(blk.offset, blk.size) =
                    prob.beta[blk.param].segment(prob.offset[blk.param][blk.term], blk.size).transpose();
                if (blk.penalized) chain.tau2(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(bi)) = tau2[bi];
            }
            ++row;
        }
    }

    const double kept = static_cast<double>(options.iterations - options.burnin);
    for (std::size_t bi = 0; bi < nblocks; ++bi) {
        chain.acceptance.push_back(static_cast<double>(accepted[bi]) / kept);
        const double burn = options.burnin > 0 ? static_cast<double>(accepted_burn[bi]) / static_cast<double>(options.burnin)
                                               : chain.acceptance.back();
        chain.burnin_acceptance.push_back(burn);
        if (burn < 0.01) {
            const McmcBlock& blk = chain.blocks[bi];
            chain.warnings.push_back((*start.spec.layout)[blk.param].name + " " +
                                     prob.blocks[blk.param][blk.term].spec().label() +
                                     ": acceptance rate below 1% during burn-in");
        }
    }
    return chain;
}

double quantile(std::vector<double> values, double prob) {
    if (values.empty()) throw invalid_parameter("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<Band> credible_bands(const ChainState& chain, std::size_t param, std::optional<std::size_t> term,
                                 const DataTable& grid, double level) {
    if (chain.size() == 0) throw invalid_parameter("empty chain");
    const ParamFit& pf = chain.base.params.at(param);
    const auto m = static_cast<Eigen::Index>(grid.rows());
    std::vector<std::size_t> terms;
    if (term) {
        terms.push_back(*term);
    } else {
        for (std::size_t t = 0; t < pf.terms.size(); ++t) terms.push_back(t);
    }
    std::vector<Eigen::MatrixXd> designs;
    for (std::size_t t : terms) designs.push_back(pf.terms.at(t).block.design_for(grid));

    Eigen::MatrixXd effects(m, static_cast<Eigen::Index>(chain.size()));
    for (std::size_t d = 0; d < chain.size(); ++d) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
        for (std::size_t q = 0; q < terms.size(); ++q) {
            if (designs[q].cols() > 0) e += designs[q] * chain.coefficients(d, param, terms[q]);
        }
        effects.col(static_cast<Eigen::Index>(d)) = e;
    }
    const double tail = 0.5 * (1.0 - level);
    std::vector<Band> bands;
    for (Eigen::Index r = 0; r < m; ++r) {
        std::vector<double> v(static_cast<std::size_t>(effects.cols()));
        for (Eigen::Index c = 0; c < effects.cols(); ++c) v[static_cast<std::size_t>(c)] = effects(r, c);
        bands.push_back({quantile(v, tail), quantile(v, 0.5), quantile(v, 1.0 - tail)});
    }
    return bands;
}

double autocorrelation(std::span<const double> series, std::size_t lag) {
    const std::size_t n = series.size();
    if (lag >= n) throw invalid_parameter("lag exceeds series length");
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(n);
    double den = 0.0, num = 0.0;
    for (std::size_t i = 0; i < n; ++i) den += (series[i] - mean) * (series[i] - mean);
    for (std::size_t i = 0; i + lag < n; ++i) num += (series[i] - mean) * (series[i + lag] - mean);
    return den > 0.0 ? num / den : 0.0;
}

}  // namespace cholgauss
