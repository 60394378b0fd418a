#pragma once

// Closed catalog of scalar boundary functions used to describe the envelope
// [lower(x), upper(x)] of a multivalued operator on each of its pieces.

#include <string_view>
#include <vector>

#include "json.hpp"
#include "setfix/interval_set.hpp"

namespace setfix {

enum class TermKind { Affine, Power, Sqrt, InvSqrt, Const };

std::string_view to_string(TermKind kind) noexcept;

/// value(x) = a*x + c*basis(x) + b, where basis is x^p, sqrt(x), 1/sqrt(x),
/// or 0 for Affine and Const.
struct Term {
  TermKind kind = TermKind::Const;
  double a = 0.0;
  double c = 1.0;
  double b = 0.0;
  int p = 1;

  static Term affine(double slope, double offset);
  static Term power(double coef, int exponent, double offset = 0.0);
  static Term sqrt(double coef, double offset = 0.0);
  static Term inv_sqrt(double coef, double offset = 0.0);
  static Term constant(double value);

  double basis(double x) const noexcept;
  double operator()(double x) const noexcept { return a * x + c * basis(x) + b; }
  double derivative(double x) const noexcept;

  /// Points in the open interval (lo, hi) where the derivative vanishes.
  std::vector<double> critical_points(double lo, double hi) const;

  /// Whether the basis is defined on the whole closed interval.
  bool defined_on(const Interval& span) const noexcept;

  friend bool operator==(const Term&, const Term&) = default;
};

/// v <- wx*x + wv*v + shift, applied after the base term. A Takahashi
/// combination with weight lam is {lam, 1 - lam, 0}.
struct Blend {
  double wx = 0.0;
  double wv = 1.0;
  double shift = 0.0;

  friend bool operator==(const Blend&, const Blend&) = default;
};

/// A catalog term followed by a stack of blends. Evaluation applies the
/// blends literally, so a blended function reproduces affine_combine bit for
/// bit; the algebraically collapsed term is used only to locate extrema.
class BoundaryFn {
 public:
  BoundaryFn() = default;
  BoundaryFn(Term base) : base_(base) {}  // NOLINT(google-explicit-constructor)

  BoundaryFn then(const Blend& blend) const;

  double operator()(double x) const noexcept;

  /// Single term equal to this function (up to rounding).
  Term collapsed() const noexcept;

  /// Interior points of (lo, hi) where the function has a strict local extremum.
  std::vector<double> extrema(double lo, double hi) const;
  bool monotone_on(double lo, double hi) const { return extrema(lo, hi).empty(); }

  /// Exact [min, max] of the function over the closed interval [lo, hi].
  Interval range(double lo, double hi) const;

  const Term& base() const noexcept { return base_; }
  const std::vector<Blend>& blends() const noexcept { return blends_; }

  friend bool operator==(const BoundaryFn&, const BoundaryFn&) = default;

 private:
  Term base_;
  std::vector<Blend> blends_;
};

nlohmann::json to_json(const BoundaryFn& f);
BoundaryFn boundary_fn_from_json(const nlohmann::json& j);

}  // namespace setfix
