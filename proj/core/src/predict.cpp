#include "cholgauss/predict.hpp"

#include "cholgauss/errors.hpp"
#include "cholgauss/likelihood.hpp"
#include "cholgauss/random.hpp"

namespace cholgauss {

PredictedDistribution distribution_at(const std::shared_ptr<const ParamLayout>& layout, const Eigen::VectorXd& eta,
                                      std::size_t row) {
    const PredictorBundle bundle(layout, eta);
    return {mean_of(bundle), covariance_of(bundle), row};
}

std::vector<PredictedDistribution> predict(const FitState& fit, const DataTable& newdata,
                                           std::vector<std::string>* warnings) {
    std::size_t outside = 0;
    const Eigen::MatrixXd eta = fit.predictors(newdata, &outside);
    if (outside > 0 && warnings) {
        warnings->push_back(std::to_string(outside) + " covariate values outside the training range; effects extrapolated linearly");
    }
    std::vector<PredictedDistribution> out;
    out.reserve(newdata.rows());
    for (Eigen::Index r = 0; r < eta.rows(); ++r) {
        out.push_back(distribution_at(fit.spec.layout, eta.row(r).transpose(), static_cast<std::size_t>(r)));
    }
    return out;
}

Eigen::MatrixXd predict_parameters(const FitState& fit, const DataTable& newdata) {
    Eigen::MatrixXd eta = fit.predictors(newdata);
    const ParamLayout& layout = *fit.spec.layout;
    for (Eigen::Index p = 0; p < eta.cols(); ++p) {
        const LinkFunction link = layout[static_cast<std::size_t>(p)].link;
        eta.col(p) = eta.col(p).unaryExpr([&link](double v) { return link.inverse(v); });
    }
    return eta;
}

Eigen::MatrixXd simulate(const PredictedDistribution& dist, std::size_t m, std::uint64_t seed) {
    if (m == 0) throw invalid_parameter("simulate needs at least one draw");
    const auto k = dist.mu.size();
    Rng rng(seed);
    Eigen::MatrixXd eps(static_cast<Eigen::Index>(m), k);
    for (Eigen::Index r = 0; r < eps.rows(); ++r) {
        Eigen::VectorXd e(k);
        fill_normal(rng, e);
        eps.row(r) = e.transpose();
    }
    Eigen::MatrixXd draws = eps * dist.sigma.cholesky().transpose();
    draws.rowwise() += dist.mu.transpose();
    return draws;
}

}  // namespace cholgauss
