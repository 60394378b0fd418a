#pragma once

#include <optional>

#include "json.hpp"

namespace setfix {

// JSON has no inf/nan; those are written as the strings "inf", "-inf", "nan".
nlohmann::json real_to_json(double v);
double real_from_json(const nlohmann::json& j);

nlohmann::json opt_to_json(const std::optional<double>& v);
std::optional<double> opt_from_json(const nlohmann::json& j);

}  // namespace setfix
