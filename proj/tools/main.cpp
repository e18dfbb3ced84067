#include "cholgauss/data_table.hpp"
#include "cholgauss/errors.hpp"
#include "cholgauss/estimate.hpp"
#include "cholgauss/experiments.hpp"
#include "cholgauss/fit_io.hpp"
#include "cholgauss/likelihood.hpp"
#include "cholgauss/model_spec.hpp"
#include "cholgauss/parallel.hpp"
#include "cholgauss/predict.hpp"
#include "cholgauss/random.hpp"
#include "cholgauss/scoring.hpp"
#include "cholgauss/simgen.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace cholgauss;

namespace {

struct Args {
    std::string input;
    std::vector<std::string> specs;
    std::string fit_path;
    std::string out;
    std::uint64_t seed = 1;
    std::size_t folds = 5;
    std::size_t reps = 10;
    unsigned workers = 0;
    std::string family;
    int ad_order = -1;
    double alpha = 1.0;
    std::size_t n = 0;
    std::size_t k = 3;
    std::string experiment;
    std::string reference;
    bool weather = false;
    bool no_select = false;
    bool contiguous = false;
    std::size_t vs_draws = 1000;
    std::vector<std::size_t> ns;
    std::vector<double> alphas;
    std::vector<std::size_t> ks;
    std::size_t eval_points = 10000;
};

ModelSpec read_spec(const std::string& path, const Args& a) {
    std::ifstream in(path);
    if (!in) throw schema_error("cannot open model spec " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw schema_error("model spec " + path + ": " + e.what());
    }
    if (!a.family.empty()) doc["family"] = a.family;
    if (a.ad_order >= 0) doc["ad_order"] = a.ad_order;
    if (!doc.contains("name")) doc["name"] = fs::path(path).stem().string();
    return parse_model_spec(doc);
}

void require_columns(const ModelSpec& spec, const DataTable& data) {
    for (const auto& c : spec.response) (void)data.column(c);
    for (const auto& c : spec.covariates()) (void)data.column(c);
}

std::string to_csv(const DataTable& t) {
    std::ostringstream os;
    write_csv(os, t);
    return os.str();
}

FitOptions fit_options(const Args& a) {
    FitOptions o;
    o.select_smoothing = !a.no_select;
    return o;
}

int cmd_simulate(const Args& a) {
    const fs::path out = a.out.empty() ? fs::path(".") : fs::path(a.out);
    fs::create_directories(out);
    if (a.weather) {
        const DataTable data = generate_weather_analog(a.n == 0 ? 1798 : a.n, a.seed);
        write_file_atomic(out / "weather.csv", to_csv(data));
        std::cout << (out / "weather.csv").string() << "\n";
        return 0;
    }
    const SimConfig cfg{a.n == 0 ? 500 : a.n, a.k, a.alpha, a.seed};
    validate(cfg);
    write_file_atomic(out / "data.csv", to_csv(generate(cfg)));
    write_file_atomic(out / "truth.csv", to_csv(truth_table(cfg)));
    std::cout << (out / "data.csv").string() << "\n" << (out / "truth.csv").string() << "\n";
    return 0;
}

int cmd_fit(const Args& a) {
    if (a.specs.size() != 1) throw CLI::ValidationError("--spec", "fit takes exactly one model spec");
    const ModelSpec spec = read_spec(a.specs[0], a);
    const DataTable data = read_csv(fs::path(a.input));
    require_columns(spec, data);
    const fs::path out = a.out.empty() ? fs::path(spec.name + ".fit.json") : fs::path(a.out);
    try {
        const FitState st = fit(spec, data, fit_options(a));
        save_fit(out, st);
        for (const auto& w : st.warnings) std::cerr << "warning: " << w << "\n";
        std::cout << out.string() << "\n";
        return st.converged ? 0 : 3;
    } catch (const convergence_failure& e) {
        nlohmann::json diag{{"status", "convergence_failure"}, {"model", spec.name}, {"message", e.what()}};
        write_file_atomic(out, diag.dump(2) + "\n");
        std::cerr << diag.dump() << "\n";
        return 3;
    }
}

DataTable prediction_table(const FitState& st, const DataTable& data, const std::vector<PredictedDistribution>& d) {
    const std::size_t k = st.spec.dim;
    DataTable t;
    Eigen::VectorXd rows(static_cast<Eigen::Index>(d.size()));
    for (std::size_t r = 0; r < d.size(); ++r) rows[static_cast<Eigen::Index>(r)] = static_cast<double>(r);
    t.add_column("row", rows);
    for (std::size_t i = 0; i < k; ++i) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(d.size()));
        for (std::size_t r = 0; r < d.size(); ++r) v[static_cast<Eigen::Index>(r)] = d[r].mu[static_cast<Eigen::Index>(i)];
        t.add_column("mu_" + std::to_string(i + 1), v);
    }
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            Eigen::VectorXd v(static_cast<Eigen::Index>(d.size()));
            for (std::size_t r = 0; r < d.size(); ++r)
                v[static_cast<Eigen::Index>(r)] = d[r].sigma(i, j);
            t.add_column("sigma_" + std::to_string(i + 1) + "_" + std::to_string(j + 1), v);
        }
    }
    (void)data;
    return t;
}

int cmd_predict(const Args& a, bool scores) {
    const FitState st = load_fit(a.fit_path);
    const DataTable data = read_csv(fs::path(a.input));
    for (const auto& c : st.spec.covariates()) (void)data.column(c);
    std::vector<std::string> warnings;
    const auto dists = predict(st, data, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    DataTable t = prediction_table(st, data, dists);
    if (scores) {
        const auto y = data.matrix(st.spec.response);
        const auto n = static_cast<Eigen::Index>(dists.size());
        Eigen::VectorXd dv(n), vv(n), lv(n);
        for (Eigen::Index r = 0; r < n; ++r) {
            const Eigen::VectorXd yr = y.row(r).transpose();
            const auto& d = dists[static_cast<std::size_t>(r)];
            dv[r] = dss(d, yr);
            vv[r] = variogram_score(d, yr, 0.5, a.vs_draws, child_seed(a.seed, static_cast<std::uint64_t>(r)));
            lv[r] = loglik_generic(d.mu, d.sigma, yr);
        }
        t.add_column("dss", dv);
        t.add_column("vs", vv);
        t.add_column("loglik", lv);
    }
    const std::string csv = to_csv(t);
    if (a.out.empty()) {
        std::cout << csv;
    } else {
        write_file_atomic(a.out, csv);
    }
    return 0;
}

int cmd_cv(const Args& a) {
    if (a.specs.empty()) throw CLI::ValidationError("--spec", "cv needs at least one model spec");
    DataTable data = a.input.empty() ? generate_weather_analog(a.n == 0 ? 1798 : a.n, a.seed)
                                     : read_csv(fs::path(a.input));
    std::vector<ModelSpec> specs;
    for (const auto& s : a.specs) {
        specs.push_back(read_spec(s, a));
        require_columns(specs.back(), data);
    }
    CvOptions o;
    o.folds = a.folds;
    o.seed = a.seed;
    o.scheme = a.contiguous ? FoldScheme::contiguous : FoldScheme::random;
    o.fit = fit_options(a);
    o.score.vs_draws = a.vs_draws;
    o.score.seed = a.seed;
    o.workers = resolve_workers(a.workers);
    const std::string reference = a.reference.empty() ? specs.front().name : a.reference;
    const ModelComparison cmp = model_compare(specs, data, o, reference);
    const fs::path out = a.out.empty() ? fs::path("cv") : fs::path(a.out);
    fs::create_directories(out);
    std::ostringstream panel, groups, folds;
    write_panel_csv(panel, cmp);
    write_group_csv(groups, cmp);
    write_fold_csv(folds, cmp);
    write_file_atomic(out / "panel.csv", panel.str());
    write_file_atomic(out / "groups.csv", groups.str());
    write_file_atomic(out / "folds.csv", folds.str());
    int status = 0;
    for (const auto& m : cmp.models) {
        const ScorePanel& p = cmp.panels.at(m);
        const ScoreMeans s = overall_mean(p);
        std::cout << m << ": dss=" << format_double(s.dss) << " vs=" << format_double(s.vs) << " rows=" << s.count
                  << "\n";
        for (const auto& e : p.errors) {
            std::cerr << m << ": " << e << "\n";
            status = 3;
        }
    }
    return status;
}

int cmd_experiment(const Args& a) {
    ExperimentOptions o;
    o.reps = a.reps;
    o.seed = a.seed;
    o.workers = resolve_workers(a.workers);
    o.fit = fit_options(a);
    o.alpha = a.alpha;
    o.eval_points = a.eval_points;
    if (a.n > 0) o.n = a.n;
    if (!a.ns.empty()) o.ns = a.ns;
    if (!a.alphas.empty()) o.alphas = a.alphas;
    if (!a.ks.empty()) o.ks = a.ks;
    const fs::path out = a.out.empty() ? fs::path(a.experiment) : fs::path(a.out);
    fs::create_directories(out);

    if (a.experiment == "model_compare") {
        Args cv = a;
        cv.out = out.string();
        return cmd_cv(cv);
    }
    RmseTable table;
    if (a.experiment == "rmse_vs_n") {
        table = rmse_vs_n(o);
    } else if (a.experiment == "misspec_alpha") {
        table = misspec_alpha(o);
    } else if (a.experiment == "dim_sweep") {
        table = dim_sweep(o);
    } else {
        throw CLI::ValidationError("experiment", "unknown experiment '" + a.experiment + "'");
    }
    std::ostringstream rmse, summary, failures;
    write_rmse_csv(rmse, table);
    write_summary_csv(summary, summarize(table));
    for (const auto& f : table.failures) failures << f << "\n";
    write_file_atomic(out / "rmse.csv", rmse.str());
    write_file_atomic(out / "summary.csv", summary.str());
    write_file_atomic(out / "failures.txt", failures.str());
    std::cout << (out / "rmse.csv").string() << "\n";
    for (const auto& f : table.failures) std::cerr << "failed: " << f << "\n";
    return table.failures.empty() ? 0 : 3;
}

int cmd_describe(const Args& a) {
    if (a.specs.empty()) throw CLI::ValidationError("--spec", "describe needs at least one model spec");
    for (const auto& s : a.specs) {
        const ModelSpec spec = read_spec(s, a);
        const ParameterCounts c = count_covariance_parameters(spec);
        nlohmann::json row{{"name", spec.name},
                           {"family", std::string(to_string(spec.family))},
                           {"k", spec.dim},
                           {"ad_order", spec.ad_order ? nlohmann::json(*spec.ad_order) : nlohmann::json(nullptr)},
                           {"parameters", spec.layout->size()},
                           {"flexible", c.flexible},
                           {"intercept", c.intercept_only},
                           {"zero", c.structural_zero}};
        std::cout << row.dump() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multivariate Gaussian distributional regression with Cholesky-parameterized covariances"};
    app.require_subcommand(1);
    Args a;

    auto add_common = [&a](CLI::App* c) {
        c->add_option("--seed", a.seed, "Random seed");
        c->add_option("--workers", a.workers, "Worker threads (default: CHOLGAUSS_WORKERS or all cores)");
        c->add_option("--out", a.out, "Output file or directory");
    };
    auto add_spec = [&a](CLI::App* c) {
        c->add_option("--spec", a.specs, "Model-spec JSON document(s)")->check(CLI::ExistingFile);
        c->add_option("--family", a.family, "Override the family of the spec");
        c->add_option("--ad-order", a.ad_order, "Override the antedependence order");
    };

    auto* sim = app.add_subcommand("simulate", "Generate simulated data and truth tables");
    add_common(sim);
    sim->add_option("--n", a.n, "Sample size");
    sim->add_option("--k", a.k, "Response dimension (3, 5, 10, 15)");
    sim->add_option("--alpha", a.alpha, "Nonlinearity")->check(CLI::NonNegativeNumber);
    sim->add_flag("--weather", a.weather, "Write the 10-dimensional weather analog instead");

    auto* fitc = app.add_subcommand("fit", "Fit a model spec to a CSV file");
    add_common(fitc);
    add_spec(fitc);
    fitc->add_option("--input", a.input, "Input CSV")->required()->check(CLI::ExistingFile);
    fitc->add_flag("--no-select", a.no_select, "Skip smoothing-parameter selection");

    auto* pred = app.add_subcommand("predict", "Predict mean and covariance for new rows");
    add_common(pred);
    pred->add_option("--input", a.input, "Input CSV")->required()->check(CLI::ExistingFile);
    pred->add_option("--fit", a.fit_path, "Fit artifact")->required()->check(CLI::ExistingFile);

    auto* score = app.add_subcommand("score", "Score a fit on rows with observed responses");
    add_common(score);
    score->add_option("--input", a.input, "Input CSV")->required()->check(CLI::ExistingFile);
    score->add_option("--fit", a.fit_path, "Fit artifact")->required()->check(CLI::ExistingFile);
    score->add_option("--vs-draws", a.vs_draws, "Monte Carlo draws for the variogram score");

    auto* cv = app.add_subcommand("cv", "Cross-validated scores of one or more specs");
    add_common(cv);
    add_spec(cv);
    cv->add_option("--input", a.input, "Input CSV (default: generated weather analog)")->check(CLI::ExistingFile);
    cv->add_option("--folds", a.folds, "Number of folds")->check(CLI::Range(2, 1000));
    cv->add_option("--reference", a.reference, "Reference model name for score differences");
    cv->add_option("--n", a.n, "Rows of the generated weather analog");
    cv->add_option("--vs-draws", a.vs_draws, "Monte Carlo draws for the variogram score");
    cv->add_flag("--contiguous", a.contiguous, "Contiguous instead of random folds");
    cv->add_flag("--no-select", a.no_select, "Skip smoothing-parameter selection");

    auto* exp = app.add_subcommand("experiment", "Run a simulation or comparison protocol");
    add_common(exp);
    add_spec(exp);
    exp->add_option("name", a.experiment, "rmse_vs_n | misspec_alpha | dim_sweep | model_compare")
        ->required()
        ->check(CLI::IsMember({"rmse_vs_n", "misspec_alpha", "dim_sweep", "model_compare"}));
    exp->add_option("--reps", a.reps, "Replications (paper scale: 100)");
    exp->add_option("--n", a.n, "Sample size for the alpha and dimension sweeps");
    exp->add_option("--ns", a.ns, "Sample sizes for rmse_vs_n");
    exp->add_option("--alpha", a.alpha, "Nonlinearity for rmse_vs_n and dim_sweep");
    exp->add_option("--alphas", a.alphas, "Nonlinearity grid for misspec_alpha");
    exp->add_option("--k", a.ks, "Dimensions for dim_sweep");
    exp->add_option("--eval-points", a.eval_points, "Random x values for the RMSE");
    exp->add_option("--input", a.input, "Data for model_compare (default: generated weather analog)");
    exp->add_option("--folds", a.folds, "Folds for model_compare");
    exp->add_option("--reference", a.reference, "Reference model for model_compare");
    exp->add_option("--vs-draws", a.vs_draws, "Monte Carlo draws for the variogram score");
    exp->add_flag("--no-select", a.no_select, "Skip smoothing-parameter selection");

    auto* desc = app.add_subcommand("describe", "Report covariance-parameter counts of model specs");
    add_spec(desc);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*sim) return cmd_simulate(a);
        if (*fitc) return cmd_fit(a);
        if (*pred) return cmd_predict(a, false);
        if (*score) return cmd_predict(a, true);
        if (*cv) return cmd_cv(a);
        if (*exp) return cmd_experiment(a);
        if (*desc) return cmd_describe(a);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
