#pragma once

#include "cholgauss/estimate.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>

namespace cholgauss {

[[nodiscard]] nlohmann::json to_json(const FitState& fit);
[[nodiscard]] FitState fit_from_json(const nlohmann::json& doc);

// Pretty-printed JSON; identical inputs give identical bytes.
[[nodiscard]] std::string dump_fit(const FitState& fit);
void save_fit(const std::filesystem::path& path, const FitState& fit);
[[nodiscard]] FitState load_fit(const std::filesystem::path& path);

}  // namespace cholgauss
