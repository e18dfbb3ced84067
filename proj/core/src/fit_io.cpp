#include "cholgauss/fit_io.hpp"

#include "cholgauss/data_table.hpp"
#include "cholgauss/errors.hpp"

#include <fstream>

namespace cholgauss {

namespace {

using nlohmann::json;

const char* kind_name(TermKind kind) {
    switch (kind) {
        case TermKind::intercept: return "intercept";
        case TermKind::linear: return "linear";
        case TermKind::smooth: return "smooth";
        case TermKind::cyclic_smooth: return "cyclic_smooth";
        case TermKind::varying_coefficient: return "varying_coefficient";
    }
    return "intercept";
}

TermKind parse_kind(const std::string& s) {
    for (TermKind k : {TermKind::intercept, TermKind::linear, TermKind::smooth, TermKind::cyclic_smooth,
                       TermKind::varying_coefficient}) {
        if (s == kind_name(k)) return k;
    }
    throw schema_error("unknown term kind '" + s + "'");
}

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json term_json(const TermFit& t) {
    const TermSpec& s = t.block.spec();
    json j;
    j["label"] = s.label();
    j["kind"] = kind_name(s.kind);
    j["covariate"] = s.covariate;
    j["by"] = s.by;
    j["basis_size"] = s.basis_size;
    j["penalty_order"] = s.penalty_order;
    j["period"] = s.period ? json(*s.period) : json(nullptr);
    if (const auto& sp = t.block.spline()) {
        j["spline"] = {{"lo", sp->lo()}, {"hi", sp->hi()}, {"size", sp->size()}, {"cyclic", sp->is_cyclic()}};
    } else {
        j["spline"] = nullptr;
    }
    const Eigen::MatrixXd& z = t.block.constraint();
    json rows = json::array();
    for (Eigen::Index r = 0; r < z.rows(); ++r) rows.push_back(vec(Eigen::VectorXd(z.row(r).transpose())));
    j["constraint"] = rows;
    j["coefficients"] = vec(t.beta);
    j["smoothing"] = t.smoothing;
    j["edf"] = t.edf;
    return j;
}

TermFit term_from_json(const json& j) {
    TermSpec s;
    s.kind = parse_kind(j.at("kind").get<std::string>());
    s.covariate = j.at("covariate").get<std::string>();
    s.by = j.at("by").get<std::string>();
    s.basis_size = j.at("basis_size").get<std::size_t>();
    s.penalty_order = j.at("penalty_order").get<std::size_t>();
    if (!j.at("period").is_null()) s.period = j.at("period").get<double>();
    std::optional<SplineBasis> spline;
    if (const json& sp = j.at("spline"); !sp.is_null()) {
        const auto size = sp.at("size").get<std::size_t>();
        spline = sp.at("cyclic").get<bool>() ? SplineBasis::cyclic(sp.at("hi").get<double>(), size)
                                             : SplineBasis::open(sp.at("lo").get<double>(), sp.at("hi").get<double>(), size);
    }
    Eigen::MatrixXd z;
    const json& rows = j.at("constraint");
    if (!rows.empty()) {
        const auto r = static_cast<Eigen::Index>(rows.size());
        const auto c = static_cast<Eigen::Index>(rows[0].size());
        z.resize(r, c);
        for (Eigen::Index i = 0; i < r; ++i) z.row(i) = vec(rows[static_cast<std::size_t>(i)]).transpose();
    }
    BasisBlock block(s, spline, z, {});
    Eigen::VectorXd beta = vec(j.at("coefficients"));
    if (static_cast<std::size_t>(beta.size()) != block.columns())
        throw schema_error("term " + s.label() + ": coefficient count does not match its basis");
    return {std::move(block), std::move(beta), j.at("smoothing").get<double>(), j.at("edf").get<double>()};
}

}  // namespace

nlohmann::json to_json(const FitState& fit) {
    json doc;
    doc["format"] = "cholgauss-fit";
    doc["version"] = 1;
    doc["spec"] = to_json(fit.spec);
    doc["converged"] = fit.converged;
    doc["iterations"] = fit.iterations;
    doc["n"] = fit.n;
    doc["loglik"] = fit.loglik;
    doc["pen_loglik"] = fit.pen_loglik;
    doc["edf"] = fit.edf;
    doc["aic"] = fit.aic;
    doc["warnings"] = fit.warnings;
    json params = json::array();
    for (const ParamFit& p : fit.params) {
        json terms = json::array();
        for (const TermFit& t : p.terms) terms.push_back(term_json(t));
        params.push_back({{"name", p.name}, {"terms", terms}});
    }
    doc["parameters"] = params;
    return doc;
}

FitState fit_from_json(const nlohmann::json& doc) {
    try {
        if (doc.value("format", std::string{}) != "cholgauss-fit") throw schema_error("not a fit artifact");
        FitState fit;
        fit.spec = parse_model_spec(doc.at("spec"));
        fit.converged = doc.at("converged").get<bool>();
        fit.iterations = doc.at("iterations").get<std::size_t>();
        fit.n = doc.at("n").get<std::size_t>();
        fit.loglik = doc.at("loglik").get<double>();
        fit.pen_loglik = doc.at("pen_loglik").get<double>();
        fit.edf = doc.at("edf").get<double>();
        fit.aic = doc.at("aic").get<double>();
        fit.warnings = doc.at("warnings").get<std::vector<std::string>>();
        const json& params = doc.at("parameters");
        if (params.size() != fit.spec.layout->size()) throw schema_error("parameter count does not match the spec");
        for (std::size_t p = 0; p < params.size(); ++p) {
            ParamFit pf{params[p].at("name").get<std::string>(), {}};
            if (pf.name != (*fit.spec.layout)[p].name) throw schema_error("unexpected parameter " + pf.name);
            for (const json& t : params[p].at("terms")) pf.terms.push_back(term_from_json(t));
            fit.params.push_back(std::move(pf));
        }
        return fit;
    } catch (const nlohmann::json::exception& e) {
        throw schema_error(std::string("fit artifact: ") + e.what());
    }
}

std::string dump_fit(const FitState& fit) { return to_json(fit).dump(2) + "\n"; }

void save_fit(const std::filesystem::path& path, const FitState& fit) { write_file_atomic(path, dump_fit(fit)); }

FitState load_fit(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw schema_error("cannot open fit artifact " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw schema_error("fit artifact " + path.string() + ": " + e.what());
    }
    return fit_from_json(doc);
}

}  // namespace cholgauss
