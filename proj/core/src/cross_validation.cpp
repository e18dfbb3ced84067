#include "cholgauss/errors.hpp"
#include "cholgauss/parallel.hpp"
#include "cholgauss/random.hpp"
#include "cholgauss/scoring.hpp"

#include <algorithm>
#include <numeric>

namespace cholgauss {

std::vector<CvFold> make_folds(std::size_t n, std::size_t folds, FoldScheme scheme, std::uint64_t seed) {
    if (folds < 2) throw invalid_parameter("cross-validation needs at least 2 folds");
    if (n < folds) throw invalid_parameter("fewer rows than folds");
    std::vector<std::size_t> label(n);
    if (scheme == FoldScheme::contiguous) {
        for (std::size_t r = 0; r < n; ++r) label[r] = r * folds / n;
    } else {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        Rng rng(seed);
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t q = 0; q < n; ++q) label[order[q]] = q % folds;
    }
    std::vector<CvFold> out(folds);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t f = 0; f < folds; ++f) (f == label[r] ? out[f].test : out[f].train).push_back(r);
    }
    return out;
}

ScorePanel kfold_cv(const ModelSpec& spec, const DataTable& data, const CvOptions& options) {
    const std::vector<CvFold> folds = make_folds(data.rows(), options.folds, options.scheme, options.seed);
    std::vector<std::string> groups;
    if (!options.date_column.empty() && data.has(options.date_column)) {
        groups = year_month_labels(data.column(options.date_column));
    } else {
        groups.assign(data.rows(), "all");
    }
    std::vector<ScorePanel> parts(folds.size());
    parallel_for(folds.size(), options.workers, [&](std::size_t f) {
        const int label = static_cast<int>(f) + 1;
        try {
            const FitState fitted = fit(spec, data.select_rows(folds[f].train), options.fit);
            ScoreOptions so = options.score;
            so.seed = child_seed(options.score.seed, f);
            parts[f] = score_rows(fitted, data, folds[f].test, so, label, &groups);
        } catch (const std::exception& e) {
            parts[f].failed_folds.push_back(label);
            parts[f].errors.push_back("fold " + std::to_string(label) + ": " + e.what());
        }
    });
    ScorePanel panel;
    for (const ScorePanel& p : parts) panel.append(p);
    return panel;
}

}  // namespace cholgauss
