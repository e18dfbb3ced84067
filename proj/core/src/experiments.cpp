#include "cholgauss/experiments.hpp"

#include "cholgauss/data_table.hpp"
#include "cholgauss/errors.hpp"
#include "cholgauss/mcmc.hpp"
#include "cholgauss/parallel.hpp"
#include "cholgauss/random.hpp"
#include "cholgauss/simgen.hpp"

#include <algorithm>
#include <mutex>
#include <tuple>

namespace cholgauss {

ModelSpec simulation_spec(std::size_t k, bool splines) {
    std::vector<std::string> response;
    for (std::size_t i = 1; i <= k; ++i) response.push_back("y" + std::to_string(i));
    return uniform_spec(Family::modified_chol, k, std::nullopt, splines ? "s(x, k=10)" : "x", response,
                        splines ? "spline" : "linear");
}

Eigen::VectorXd simulation_rmse(const ModelSpec& spec, std::size_t n, std::size_t k, double alpha,
                                std::uint64_t data_seed, std::uint64_t eval_seed, std::size_t eval_points,
                                const FitOptions& fit_options) {
    const DataTable data = generate({n, k, alpha, data_seed});
    const FitState fitted = fit(spec, data, fit_options);
    Rng rng(eval_seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Eigen::VectorXd x(static_cast<Eigen::Index>(eval_points));
    for (Eigen::Index r = 0; r < x.size(); ++r) x[r] = unif(rng);
    DataTable points;
    points.add_column("x", x);
    const ParamLayout& layout = *spec.layout;
    return rmse_params(
        [&](const DataTable& pts, std::size_t r) {
            return true_parameter_vector(pts.column("x")[static_cast<Eigen::Index>(r)], layout, alpha);
        },
        fitted, points);
}

namespace {

struct Job {
    std::string model;
    std::size_t n;
    std::size_t k;
    double alpha;
    std::size_t rep;
};

RmseTable run_jobs(const std::vector<Job>& jobs, const ExperimentOptions& options) {
    std::vector<std::vector<RmseRecord>> results(jobs.size());
    std::vector<std::string> failures(jobs.size());
    parallel_for(jobs.size(), options.workers, [&](std::size_t q) {
        const Job& job = jobs[q];
        try {
            const ModelSpec spec = simulation_spec(job.k, job.model == "spline");
            const Eigen::VectorXd rmse =
                simulation_rmse(spec, job.n, job.k, job.alpha, child_seed(options.seed, job.rep),
                                child_seed(options.seed, 1000000 + job.rep), options.eval_points, options.fit);
            for (std::size_t p = 0; p < spec.layout->size(); ++p) {
                results[q].push_back({job.model, job.n, job.k, job.alpha, job.rep, (*spec.layout)[p].name,
                                      rmse[static_cast<Eigen::Index>(p)]});
            }
        } catch (const std::exception& e) {
            failures[q] = job.model + " n=" + std::to_string(job.n) + " k=" + std::to_string(job.k) +
                          " alpha=" + format_double(job.alpha) + " rep=" + std::to_string(job.rep) + ": " + e.what();
        }
    });
    RmseTable table;
    for (std::size_t q = 0; q < jobs.size(); ++q) {
        table.records.insert(table.records.end(), results[q].begin(), results[q].end());
        if (!failures[q].empty()) table.failures.push_back(failures[q]);
    }
    return table;
}

}  // namespace

RmseTable rmse_vs_n(const ExperimentOptions& options) {
    std::vector<Job> jobs;
    for (std::size_t n : options.ns)
        for (std::size_t r = 0; r < options.reps; ++r) jobs.push_back({"spline", n, 3, options.alpha, r});
    return run_jobs(jobs, options);
}

RmseTable misspec_alpha(const ExperimentOptions& options) {
    std::vector<Job> jobs;
    for (double a : options.alphas)
        for (const char* model : {"spline", "linear"})
            for (std::size_t r = 0; r < options.reps; ++r) jobs.push_back({model, options.n, 3, a, r});
    return run_jobs(jobs, options);
}

RmseTable dim_sweep(const ExperimentOptions& options) {
    std::vector<Job> jobs;
    for (std::size_t k : options.ks) {
        validate(SimConfig{options.n, k, options.alpha, options.seed});
        for (std::size_t r = 0; r < options.reps; ++r) jobs.push_back({"spline", options.n, k, options.alpha, r});
    }
    return run_jobs(jobs, options);
}

void write_rmse_csv(std::ostream& out, const RmseTable& table) {
    out << "model,n,k,alpha,rep,param,rmse\n";
    for (const RmseRecord& r : table.records) {
        out << r.model << ',' << r.n << ',' << r.k << ',' << format_double(r.alpha) << ',' << r.rep << ",\""
            << r.param << "\"," << format_double(r.rmse) << '\n';
    }
}

std::vector<RmseSummary> summarize(const RmseTable& table) {
    using Key = std::tuple<std::string, std::size_t, std::size_t, double, std::string>;
    std::map<Key, std::vector<double>> groups;
    std::vector<Key> order;
    for (const RmseRecord& r : table.records) {
        Key key{r.model, r.n, r.k, r.alpha, r.param};
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted) order.push_back(key);
        it->second.push_back(r.rmse);
    }
    std::vector<RmseSummary> out;
    for (const Key& key : order) {
        const auto& v = groups[key];
        out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), std::get<3>(key), std::get<4>(key),
                       quantile(v, 0.5), v.size()});
    }
    return out;
}

void write_summary_csv(std::ostream& out, const std::vector<RmseSummary>& rows) {
    out << "model,n,k,alpha,param,median_rmse,reps\n";
    for (const RmseSummary& r : rows) {
        out << r.model << ',' << r.n << ',' << r.k << ',' << format_double(r.alpha) << ",\"" << r.param << "\","
            << format_double(r.median) << ',' << r.count << '\n';
    }
}

ModelComparison model_compare(const std::vector<ModelSpec>& specs, const DataTable& data, const CvOptions& options,
                              const std::string& reference) {
    ModelComparison cmp;
    cmp.reference = reference;
    for (const ModelSpec& spec : specs) {
        if (cmp.panels.count(spec.name)) throw invalid_parameter("duplicate model name '" + spec.name + "'");
        cmp.models.push_back(spec.name);
        cmp.panels[spec.name] = kfold_cv(spec, data, options);
    }
    if (!reference.empty() && !cmp.panels.count(reference))
        throw invalid_parameter("reference model '" + reference + "' is not among the compared models");
    return cmp;
}

void write_panel_csv(std::ostream& out, const ModelComparison& cmp) {
    out << "model,row,fold,group,dss,vs,loglik\n";
    for (const std::string& m : cmp.models) {
        const ScorePanel& p = cmp.panels.at(m);
        for (std::size_t r = 0; r < p.size(); ++r) {
            out << m << ',' << p.row[r] << ',' << p.fold[r] << ',' << p.group[r] << ',' << format_double(p.dss[r])
                << ',' << format_double(p.vs[r]) << ',' << format_double(p.loglik[r]) << '\n';
        }
    }
}

void write_group_csv(std::ostream& out, const ModelComparison& cmp) {
    const std::map<std::string, ScoreMeans> empty;
    const auto ref = cmp.reference.empty() ? empty : mean_by_group(cmp.panels.at(cmp.reference));
    out << "model,group,count,dss,vs,loglik,dss_diff,vs_diff\n";
    for (const std::string& m : cmp.models) {
        for (const auto& [g, s] : mean_by_group(cmp.panels.at(m))) {
            out << m << ',' << g << ',' << s.count << ',' << format_double(s.dss) << ',' << format_double(s.vs) << ','
                << format_double(s.loglik);
            if (auto it = ref.find(g); it != ref.end()) {
                out << ',' << format_double(s.dss - it->second.dss) << ',' << format_double(s.vs - it->second.vs);
            } else {
                out << ",NA,NA";
            }
            out << '\n';
        }
    }
}

void write_fold_csv(std::ostream& out, const ModelComparison& cmp) {
    out << "model,fold,status,count,dss,vs,loglik\n";
    for (const std::string& m : cmp.models) {
        const ScorePanel& p = cmp.panels.at(m);
        for (const auto& [f, s] : mean_by_fold(p)) {
            out << m << ',' << f << ",ok," << s.count << ',' << format_double(s.dss) << ',' << format_double(s.vs)
                << ',' << format_double(s.loglik) << '\n';
        }
        for (int f : p.failed_folds) out << m << ',' << f << ",failed,0,NA,NA,NA\n";
    }
}

}  // namespace cholgauss
