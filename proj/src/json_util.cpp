#include "setfix/json_util.hpp"

#include <cmath>
#include <limits>

#include "setfix/error.hpp"

namespace setfix {

nlohmann::json real_to_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double real_from_json(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw Error(ErrorCode::SchemaError, "expected a number, got " + j.dump());
}

nlohmann::json opt_to_json(const std::optional<double>& v) {
  return v ? real_to_json(*v) : nlohmann::json(nullptr);
}

std::optional<double> opt_from_json(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return real_from_json(j);
}

}  // namespace setfix
