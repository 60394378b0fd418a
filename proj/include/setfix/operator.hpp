#pragma once

// Piecewise-monotone multivalued operators T: X -> P_cl(X), their admissible
// perturbations T_G(x) = {G(x,u) : u in T(x)}, and exact set images.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "setfix/expression.hpp"
#include "setfix/interval_set.hpp"

namespace setfix {

/// One piece of an operator: on `sub`, T(x) = [lower(x), upper(x)].
/// Every piece is left-closed; the last one also contains domain.hi.
struct Piece {
  Interval sub;
  BoundaryFn lower;
  BoundaryFn upper;

  friend bool operator==(const Piece&, const Piece&) = default;
};

/// Absolute slack used when checking that values stay inside the domain.
double domain_eps(const Domain& d) noexcept;

class MultivaluedOperator {
 public:
  /// Validates coverage, monotonicity, lower <= upper and the self-map
  /// property; throws InvalidOperator with the offending piece otherwise.
  MultivaluedOperator(Domain domain, std::vector<Piece> pieces, std::string name = "custom");

  const Domain& domain() const noexcept { return domain_; }
  const std::vector<Piece>& pieces() const noexcept { return pieces_; }
  const std::string& name() const noexcept { return name_; }

  /// Index of the piece selected for x (left-closed).
  std::size_t piece_index(double x) const;

  /// T(x); throws OutOfDomain for x outside the domain.
  IntervalUnion eval(double x) const;
  IntervalUnion operator()(double x) const { return eval(x); }

  /// T(Y) = union of T(y) over y in Y, computed exactly from the monotone
  /// boundary functions. Throws OutOfDomain if Y leaves the domain.
  IntervalUnion set_image(const IntervalUnion& y) const;

 private:
  Domain domain_;
  std::vector<Piece> pieces_;
  std::string name_;
};

/// Pointwise view used by certification and stability code: either an exact
/// catalog operator or a sampled black-box callable.
class PointwiseOperator {
 public:
  using Fn = std::function<IntervalUnion(double)>;

  PointwiseOperator(const MultivaluedOperator& op);  // NOLINT(google-explicit-constructor)
  PointwiseOperator(Domain domain, Fn fn, std::string name);

  IntervalUnion eval(double x) const;
  IntervalUnion operator()(double x) const { return eval(x); }

  const Domain& domain() const noexcept { return domain_; }
  const std::string& name() const noexcept { return name_; }
  /// False for black-box callables; reports carry this as "sampled".
  bool exact() const noexcept { return exact_; }

 private:
  Domain domain_;
  Fn fn_;
  std::string name_;
  bool exact_;
};

/// G(x, y) = wx*x + wy*y + shift.
struct LinearG {
  double wx = 0.0;
  double wy = 1.0;
  double shift = 0.0;
};

class PerturbationSpec {
 public:
  /// W(x, y, lam) = lam*x + (1-lam)*y; throws ParameterRange unless 0 < lam < 1.
  static PerturbationSpec takahashi(double lam);
  static PerturbationSpec general(LinearG g);

  double apply(double x, double y) const noexcept;
  bool is_takahashi() const noexcept { return takahashi_; }
  /// The weight for Takahashi specs.
  std::optional<double> lambda() const noexcept;
  const LinearG& linear() const noexcept { return g_; }
  /// The same map as a blend v <- wx*x + wv*v + shift.
  Blend blend() const noexcept;
  std::string describe() const;

 private:
  PerturbationSpec(bool takahashi, LinearG g) : takahashi_(takahashi), g_(g) {}

  bool takahashi_;
  LinearG g_;
};

struct AxiomReport {
  bool passed = false;
  double max_identity_error = 0.0;  // max |G(x,x) - x| over the grid
  std::optional<std::pair<double, double>> witness;  // y != x with G(x,y) ~ x
  std::size_t grid_n = 0;
};

constexpr double axiom_identity_tol = 1e-12;
constexpr double axiom_witness_tol = 1e-9;

/// Grid check of G(x,x) = x and (G(x,y) = x  =>  y = x). Among violating
/// pairs the reported witness maximizes |x - y|.
AxiomReport check_perturbation_axioms(const PerturbationSpec& p, const Domain& dom,
                                      std::size_t grid_n = 1001);

/// x -> {G(x,u) : u in T(x)} as a catalog operator. Pieces are split where
/// the blended boundary functions stop being monotone. Throws AxiomViolation
/// if the axiom check fails and InvalidOperator if T_G leaves the domain.
MultivaluedOperator perturb(const MultivaluedOperator& t, const PerturbationSpec& p,
                            std::size_t axiom_grid_n = 1001);

namespace builtin {

/// T(x) = [-x^2, x^2] on [-8/9, 8/9].
MultivaluedOperator square_example();

/// T(x) = [1, 1/sqrt(x)] on [1/4, 1) and [1, sqrt(x)] on [1, 4].
MultivaluedOperator sqrt_example();

/// Throws SchemaError for unknown names.
MultivaluedOperator by_name(const std::string& name);

}  // namespace builtin

nlohmann::json to_json(const MultivaluedOperator& op);
/// Accepts a built-in name (string) or the
/// {"domain":[lo,hi], "pieces":[{"sub":[a,b], "lower":term, "upper":term}]} form.
MultivaluedOperator operator_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PerturbationSpec& p);
/// {"kind":"takahashi","lambda":l} or {"kind":"linear","wx":..,"wy":..,"shift":..}.
PerturbationSpec perturbation_from_json(const nlohmann::json& j);

}  // namespace setfix
