#pragma once

#include "cholgauss/basis.hpp"
#include "cholgauss/layout.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cholgauss {

// Parsed model-spec document: family, dimension, response columns and the
// additive terms of every active distributional parameter (layout order).
// Each term list starts with the implicit intercept.
struct ModelSpec {
    std::string name;
    Family family = Family::basic_chol;
    std::size_t dim = 1;
    std::optional<std::size_t> ad_order;
    std::vector<std::string> response;
    std::shared_ptr<const ParamLayout> layout;
    std::vector<std::vector<TermSpec>> terms;
    std::vector<std::string> formulas;  // resolved formula text per parameter
    std::map<std::string, double> periods;

    [[nodiscard]] std::vector<std::string> covariates() const;
};

// Terms of one formula, e.g. "s(x, k=10) + cyclic(yday):mean_3". `[i]` and
// `[j]` are replaced by the 1-based indices before parsing. The returned list
// always starts with the intercept.
[[nodiscard]] std::vector<TermSpec> parse_formula(std::string_view formula,
                                                  const std::map<std::string, double>& periods = {});

[[nodiscard]] ModelSpec parse_model_spec(const nlohmann::json& doc);
[[nodiscard]] ModelSpec load_model_spec(const std::filesystem::path& path);
[[nodiscard]] nlohmann::json to_json(const ModelSpec& spec);

// Same formula for every parameter; handy for simulations.
[[nodiscard]] ModelSpec uniform_spec(Family family, std::size_t dim, std::optional<std::size_t> ad_order,
                                     std::string formula, std::vector<std::string> response,
                                     std::string name = {});

struct ParameterCounts {
    std::size_t flexible = 0;        // covariance parameters with covariate effects
    std::size_t intercept_only = 0;  // covariance parameters modeled by a constant
    std::size_t structural_zero = 0;
};

[[nodiscard]] ParameterCounts count_covariance_parameters(const ModelSpec& spec);

}  // namespace cholgauss
