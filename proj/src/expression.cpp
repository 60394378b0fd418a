#include "setfix/expression.hpp"

#include <algorithm>
#include <cmath>

#include "setfix/error.hpp"

namespace setfix {

namespace {

double pow_int(double x, int p) noexcept {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

int sign(double v) noexcept { return (v > 0.0) - (v < 0.0); }

}  // namespace

std::string_view to_string(TermKind kind) noexcept {
  switch (kind) {
    case TermKind::Affine: return "affine";
    case TermKind::Power: return "power";
    case TermKind::Sqrt: return "sqrt";
    case TermKind::InvSqrt: return "invsqrt";
    case TermKind::Const: return "const";
  }
  return "?";
}

Term Term::affine(double slope, double offset) { return {TermKind::Affine, slope, 0.0, offset, 1}; }

Term Term::power(double coef, int exponent, double offset) {
  if (exponent < 1) throw Error(ErrorCode::ParameterRange, "power exponent must be >= 1");
  return {TermKind::Power, 0.0, coef, offset, exponent};
}

Term Term::sqrt(double coef, double offset) { return {TermKind::Sqrt, 0.0, coef, offset, 1}; }

Term Term::inv_sqrt(double coef, double offset) { return {TermKind::InvSqrt, 0.0, coef, offset, 1}; }

Term Term::constant(double value) { return {TermKind::Const, 0.0, 0.0, value, 1}; }

double Term::basis(double x) const noexcept {
  switch (kind) {
    case TermKind::Power: return pow_int(x, p);
    case TermKind::Sqrt: return std::sqrt(x);
    case TermKind::InvSqrt: return 1.0 / std::sqrt(x);
    case TermKind::Affine:
    case TermKind::Const: return 0.0;
  }
  return 0.0;
}

double Term::derivative(double x) const noexcept {
  switch (kind) {
    case TermKind::Power: return a + c * p * pow_int(x, p - 1);
    case TermKind::Sqrt: return a + c / (2.0 * std::sqrt(x));
    case TermKind::InvSqrt: return a - c / (2.0 * x * std::sqrt(x));
    case TermKind::Affine:
    case TermKind::Const: return a;
  }
  return a;
}

std::vector<double> Term::critical_points(double lo, double hi) const {
  std::vector<double> roots;
  switch (kind) {
    case TermKind::Affine:
    case TermKind::Const: break;
    case TermKind::Power: {
      if (c == 0.0 || p == 1) break;
      const double t = -a / (c * p);
      const int q = p - 1;
      if (q % 2 == 1) {
        roots.push_back(sign(t) * std::pow(std::abs(t), 1.0 / q));
      } else if (t > 0.0) {
        const double r = std::pow(t, 1.0 / q);
        roots.push_back(-r);
        roots.push_back(r);
      } else if (t == 0.0) {
        roots.push_back(0.0);
      }
      break;
    }
    case TermKind::Sqrt: {
      if (a == 0.0 || c == 0.0) break;
      const double s = -c / (2.0 * a);
      if (s > 0.0) roots.push_back(s * s);
      break;
    }
    case TermKind::InvSqrt: {
      if (a == 0.0 || c == 0.0) break;
      const double s = c / (2.0 * a);
      if (s > 0.0) roots.push_back(std::cbrt(s * s));
      break;
    }
  }
  std::erase_if(roots, [&](double r) { return !(r > lo && r < hi); });
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
  return roots;
}

bool Term::defined_on(const Interval& span) const noexcept {
  switch (kind) {
    case TermKind::Sqrt: return span.lo >= 0.0;
    case TermKind::InvSqrt: return span.lo > 0.0;
    default: return true;
  }
}

BoundaryFn BoundaryFn::then(const Blend& blend) const {
  BoundaryFn out = *this;
  out.blends_.push_back(blend);
  return out;
}

double BoundaryFn::operator()(double x) const noexcept {
  double v = base_(x);
  for (const auto& bl : blends_) v = bl.wx * x + bl.wv * v + bl.shift;
  return v;
}

Term BoundaryFn::collapsed() const noexcept {
  Term t = base_;
  for (const auto& bl : blends_) {
    t.a = bl.wx + bl.wv * t.a;
    t.c = bl.wv * t.c;
    t.b = bl.wv * t.b + bl.shift;
  }
  return t;
}

std::vector<double> BoundaryFn::extrema(double lo, double hi) const {
  const Term t = collapsed();
  const auto crit = t.critical_points(lo, hi);
  std::vector<double> out;
  if (crit.empty()) return out;
  std::vector<double> knots{lo};
  knots.insert(knots.end(), crit.begin(), crit.end());
  knots.push_back(hi);
  // derivative sign on each open sub-interval between consecutive knots
  std::vector<int> signs;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    signs.push_back(sign(t.derivative(0.5 * (knots[i] + knots[i + 1]))));
  }
  for (std::size_t i = 0; i < crit.size(); ++i) {
    if (signs[i] != 0 && signs[i + 1] != 0 && signs[i] != signs[i + 1]) out.push_back(crit[i]);
  }
  return out;
}

Interval BoundaryFn::range(double lo, double hi) const {
  double mn = std::min((*this)(lo), (*this)(hi));
  double mx = std::max((*this)(lo), (*this)(hi));
  for (double r : collapsed().critical_points(lo, hi)) {
    const double v = (*this)(r);
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  return {mn, mx};
}

nlohmann::json to_json(const BoundaryFn& f) {
  const Term& t = f.base();
  nlohmann::json j{{"kind", std::string(to_string(t.kind))}};
  switch (t.kind) {
    case TermKind::Affine: j["a"] = t.a; j["b"] = t.b; break;
    case TermKind::Const: j["b"] = t.b; break;
    case TermKind::Power: j["a"] = t.a; j["c"] = t.c; j["b"] = t.b; j["p"] = t.p; break;
    case TermKind::Sqrt:
    case TermKind::InvSqrt: j["a"] = t.a; j["c"] = t.c; j["b"] = t.b; break;
  }
  if (!f.blends().empty()) {
    auto arr = nlohmann::json::array();
    for (const auto& bl : f.blends()) arr.push_back({bl.wx, bl.wv, bl.shift});
    j["blends"] = std::move(arr);
  }
  return j;
}

namespace {

double number_or(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw Error(ErrorCode::SchemaError, std::string("term field '") + key + "' must be a number");
  return j[key].get<double>();
}

}  // namespace

BoundaryFn boundary_fn_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw Error(ErrorCode::SchemaError, "term must be an object with a string 'kind', got " + j.dump());
  }
  const auto kind = j["kind"].get<std::string>();
  Term t;
  if (kind == "affine") {
    t = Term::affine(number_or(j, "a", 0.0), number_or(j, "b", 0.0));
  } else if (kind == "const") {
    t = Term::constant(number_or(j, "b", number_or(j, "value", 0.0)));
  } else if (kind == "power") {
    if (!j.contains("p") || !j["p"].is_number_integer()) {
      throw Error(ErrorCode::SchemaError, "power term needs an integer 'p'");
    }
    t = Term::power(number_or(j, "c", 1.0), j["p"].get<int>(), number_or(j, "b", 0.0));
    t.a = number_or(j, "a", 0.0);
  } else if (kind == "sqrt" || kind == "invsqrt") {
    t = kind == "sqrt" ? Term::sqrt(number_or(j, "c", 1.0), number_or(j, "b", 0.0))
                       : Term::inv_sqrt(number_or(j, "c", 1.0), number_or(j, "b", 0.0));
    t.a = number_or(j, "a", 0.0);
  } else {
    throw Error(ErrorCode::SchemaError, "unknown term kind '" + kind + "'");
  }
  BoundaryFn f(t);
  if (j.contains("blends")) {
    for (const auto& bl : j["blends"]) {
      if (!bl.is_array() || bl.size() != 3) throw Error(ErrorCode::SchemaError, "blend must be [wx, wv, shift]");
      f = f.then({bl[0].get<double>(), bl[1].get<double>(), bl[2].get<double>()});
    }
  }
  return f;
}

}  // namespace setfix
