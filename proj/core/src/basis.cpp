#include "cholgauss/basis.hpp"

#include "cholgauss/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace cholgauss {

std::string TermSpec::label() const {
    switch (kind) {
        case TermKind::intercept: return "1";
        case TermKind::linear: return covariate;
        case TermKind::smooth: return "s(" + covariate + ")";
        case TermKind::cyclic_smooth: return "cyclic(" + covariate + ")";
        case TermKind::varying_coefficient:
            return std::string(period ? "cyclic(" : "s(") + covariate + "):" + by;
    }
    return "?";
}

SplineBasis::SplineBasis(double lo, double hi, std::size_t size, bool cyclic)
    : lo_(lo), hi_(hi), size_(size), cyclic_(cyclic) {
    if (size_ < 4) throw invalid_parameter("cubic spline basis needs at least 4 functions");
    if (!(hi_ > lo_)) throw invalid_parameter("spline basis range must be non-empty");
}

SplineBasis SplineBasis::open(double lo, double hi, std::size_t size) { return {lo, hi, size, false}; }

SplineBasis SplineBasis::cyclic(double period, std::size_t size) { return {0.0, period, size, true}; }

namespace {

struct Cardinal {
    double w[4];
    double d1[4];
    double d2[4];
};

// Uniform cubic B-spline pieces on one interval, local coordinate t in [0, 1].
Cardinal cardinal(double t) {
    const double s = 1.0 - t;
    return {{s * s * s / 6.0, (3.0 * t * t * t - 6.0 * t * t + 4.0) / 6.0,
             (-3.0 * t * t * t + 3.0 * t * t + 3.0 * t + 1.0) / 6.0, t * t * t / 6.0},
            {-0.5 * s * s, 1.5 * t * t - 2.0 * t, -1.5 * t * t + t + 0.5, 0.5 * t * t},
            {s, 3.0 * t - 2.0, -3.0 * t + 1.0, t}};
}

}  // namespace

bool SplineBasis::eval(double x, std::span<double> values, std::span<double> d1, std::span<double> d2) const {
    std::fill(values.begin(), values.end(), 0.0);
    if (!d1.empty()) std::fill(d1.begin(), d1.end(), 0.0);
    if (!d2.empty()) std::fill(d2.begin(), d2.end(), 0.0);

    if (cyclic_) {
        const double period = hi_;
        const double h = period / static_cast<double>(size_);
        double xr = std::fmod(x, period);
        if (xr < 0.0) xr += period;
        const double u = xr / h;
        const double fl = std::floor(u);
        const auto q = static_cast<std::size_t>(fl) % size_;
        const Cardinal c = cardinal(u - fl);
        for (std::size_t s = 0; s < 4; ++s) {
            const std::size_t col = (q + s) % size_;
            values[col] += c.w[s];
            if (!d1.empty()) d1[col] += c.d1[s] / h;
            if (!d2.empty()) d2[col] += c.d2[s] / (h * h);
        }
        return false;
    }

    const std::size_t intervals = size_ - 3;
    const double h = (hi_ - lo_) / static_cast<double>(intervals);
    const bool below = x < lo_;
    const bool above = x > hi_;
    const double xe = below ? lo_ : (above ? hi_ : x);
    const double u = (xe - lo_) / h;
    const auto q = std::min(static_cast<std::size_t>(std::max(0.0, std::floor(u))), intervals - 1);
    const Cardinal c = cardinal(u - static_cast<double>(q));
    const double dx = x - xe;
    for (std::size_t s = 0; s < 4; ++s) {
        values[q + s] = c.w[s] + dx * c.d1[s] / h;
        if (!d1.empty()) d1[q + s] = c.d1[s] / h;
        if (!d2.empty() && !below && !above) d2[q + s] = c.d2[s] / (h * h);
    }
    return below || above;
}

namespace {

// Coefficients of the order-q forward difference, e.g. (1, -2, 1) for q = 2.
std::vector<double> difference_coefficients(std::size_t order) {
    std::vector<double> c{1.0};
    for (std::size_t q = 0; q < order; ++q) {
        std::vector<double> next(c.size() + 1, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i] -= c[i];
            next[i + 1] += c[i];
        }
        c = std::move(next);
    }
    return c;
}

}  // namespace

Eigen::MatrixXd SplineBasis::penalty(std::size_t order) const {
    const auto d = static_cast<Eigen::Index>(size_);
    const std::vector<double> coef = difference_coefficients(order);
    const auto width = static_cast<Eigen::Index>(coef.size());
    if (!cyclic_ && width > d) throw invalid_parameter("penalty order too large for basis size");
    const Eigen::Index rows = cyclic_ ? d : d - width + 1;
    Eigen::MatrixXd diff = Eigen::MatrixXd::Zero(rows, d);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index s = 0; s < width; ++s) diff(r, (r + s) % d) += coef[static_cast<std::size_t>(s)];
    }
    return diff.transpose() * diff;
}

std::size_t SplineBasis::penalty_rank(std::size_t order) const noexcept {
    if (order == 0) return size_;
    return cyclic_ ? size_ - 1 : size_ - order;
}

BasisBlock::BasisBlock(TermSpec spec, std::optional<SplineBasis> spline, Eigen::MatrixXd constraint,
                       Eigen::MatrixXd design, std::vector<std::string> warnings)
    : spec_(std::move(spec)), spline_(std::move(spline)), constraint_(std::move(constraint)),
      design_(std::move(design)), warnings_(std::move(warnings)) {
    if (spline_) {
        const Eigen::MatrixXd raw = spline_->penalty(spec_.penalty_order);
        penalty_ = constraint_.size() ? Eigen::MatrixXd(constraint_.transpose() * raw * constraint_) : raw;
        columns_ = static_cast<std::size_t>(penalty_.rows());
        std::size_t rank = spline_->penalty_rank(spec_.penalty_order);
        // Centering removes the constant direction, which lies in every difference penalty's null space.
        if (constraint_.size() && !spline_->is_cyclic()) rank = std::min(rank, columns_);
        if (constraint_.size() && spline_->is_cyclic()) rank = columns_;
        penalty_rank_ = rank;
    } else if (spec_.kind == TermKind::intercept || spec_.kind == TermKind::linear) {
        columns_ = design_.size() ? static_cast<std::size_t>(design_.cols()) : 1;
        penalty_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(columns_), static_cast<Eigen::Index>(columns_));
    } else {
        // Degraded smooth: absorbed into the intercept.
        columns_ = 0;
        penalty_.resize(0, 0);
    }
}

BasisBlock BasisBlock::without_design() const {
    BasisBlock out = *this;
    out.design_.resize(0, 0);
    return out;
}

Eigen::MatrixXd BasisBlock::design_for(const DataTable& data, std::size_t* extrapolated) const {
    const auto n = static_cast<Eigen::Index>(data.rows());
    if (columns_ == 0) return Eigen::MatrixXd::Zero(n, 0);
    switch (spec_.kind) {
        case TermKind::intercept: return Eigen::MatrixXd::Ones(n, 1);
        case TermKind::linear: return data.column(spec_.covariate);
        default: break;
    }
    if (!spline_) return Eigen::MatrixXd::Zero(n, 0);
    const Eigen::VectorXd& x = data.column(spec_.covariate);
    const Eigen::VectorXd* by = spec_.kind == TermKind::varying_coefficient ? &data.column(spec_.by) : nullptr;
    const auto d = static_cast<Eigen::Index>(spline_->size());
    Eigen::MatrixXd raw(n, d);
    std::vector<double> row(static_cast<std::size_t>(d));
    std::size_t outside = 0;
    for (Eigen::Index r = 0; r < n; ++r) {
        if (spline_->eval(x[r], row)) ++outside;
        const double scale = by ? (*by)[r] : 1.0;
        for (Eigen::Index c = 0; c < d; ++c) raw(r, c) = scale * row[static_cast<std::size_t>(c)];
    }
    if (extrapolated) *extrapolated += outside;
    return constraint_.size() ? Eigen::MatrixXd(raw * constraint_) : raw;
}

BasisBlock build_block(const TermSpec& spec, const DataTable& data) {
    const auto n = static_cast<Eigen::Index>(data.rows());
    std::vector<std::string> warnings;
    switch (spec.kind) {
        case TermKind::intercept:
            return {spec, std::nullopt, {}, Eigen::MatrixXd::Ones(n, 1)};
        case TermKind::linear: {
            Eigen::MatrixXd design = data.column(spec.covariate);
            return {spec, std::nullopt, {}, std::move(design)};
        }
        default: break;
    }
    if (spec.penalty_order + 1 > spec.basis_size) {
        throw invalid_parameter("term " + spec.label() + ": basis size must exceed the penalty order");
    }
    const Eigen::VectorXd& x = data.column(spec.covariate);
    if (!x.allFinite()) throw schema_error("term " + spec.label() + ": covariate has missing values");

    TermSpec used = spec;
    std::optional<SplineBasis> spline;
    if (spec.cyclic()) {
        if (!spec.period || !(*spec.period > 0.0)) throw invalid_parameter("cyclic term needs a positive period");
        spline = SplineBasis::cyclic(*spec.period, spec.basis_size);
    } else {
        const double lo = x.minCoeff();
        const double hi = x.maxCoeff();
        const std::set<double> distinct(x.data(), x.data() + x.size());
        if (!(hi > lo)) {
            warnings.push_back("term " + spec.label() + ": covariate is constant; smooth absorbed into the intercept");
            return {used, std::nullopt, {}, Eigen::MatrixXd::Zero(n, 0), std::move(warnings)};
        }
        if (distinct.size() < spec.basis_size) {
            used.basis_size = std::max<std::size_t>({4, spec.penalty_order + 1, distinct.size()});
            warnings.push_back("term " + spec.label() + ": only " + std::to_string(distinct.size()) +
                               " distinct values; basis size reduced to " + std::to_string(used.basis_size));
        }
        spline = SplineBasis::open(lo, hi, used.basis_size);
    }

    Eigen::MatrixXd constraint;
    const bool centered = spec.kind != TermKind::varying_coefficient;
    if (centered) {
        BasisBlock raw_block(used, spline, {}, {});
        const Eigen::MatrixXd raw = raw_block.design_for(data);
        const Eigen::VectorXd colsum = raw.colwise().sum().transpose();
        const Eigen::MatrixXd colmat = colsum;
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(colmat);
        const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(colsum.size(), colsum.size());
        constraint = q.rightCols(colsum.size() - 1);
    }
    BasisBlock shape(used, spline, constraint, {});
    Eigen::MatrixXd design = shape.design_for(data);
    return {used, spline, std::move(constraint), std::move(design), std::move(warnings)};
}

Eigen::VectorXd evaluate_term(const BasisBlock& block, const DataTable& newdata, const Eigen::VectorXd& beta,
                              std::size_t* extrapolated) {
    if (static_cast<std::size_t>(beta.size()) != block.columns()) {
        throw invalid_parameter("term " + block.spec().label() + ": coefficient length mismatch");
    }
    if (block.columns() == 0) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(newdata.rows()));
    return block.design_for(newdata, extrapolated) * beta;
}

}  // namespace cholgauss
