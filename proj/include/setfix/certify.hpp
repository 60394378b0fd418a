#pragma once

// Grid certification of Ciric-type contraction conditions
//   H(T(x),T(y)) <= alpha*A + beta*B + gamma*C
// and the auxiliary constants l, L, xi, k relating an operator to its
// perturbation.

#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "setfix/operator.hpp"

namespace setfix {

enum class Variant { Ciric, CiricReichRus, Combined };

std::string_view to_string(Variant v) noexcept;
Variant variant_from_string(std::string_view s);

/// Sum constraints are enforced with this slack to keep them strict.
constexpr double simplex_margin = 1e-6;

struct ContractionParams {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  Variant variant = Variant::Ciric;

  /// Ciric: alpha+beta+gamma <= 1 - simplex_margin. The other two variants:
  /// alpha + 2*beta <= 1 - simplex_margin. All parameters in [0,1].
  bool admissible() const noexcept;

  friend bool operator==(const ContractionParams&, const ContractionParams&) = default;
};

/// Coefficients (A, B, C) of the pair (x, y) for a variant:
///   Ciric     (d, D(x,Ty), D(y,Tx))
///   CRR       (d, D(x,Tx), D(y,Ty))
///   Combined  (d, D(x,Tx)+D(y,Ty), D(x,Ty)+D(y,Tx))
struct PairConstraint {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double h = 0.0;  // H(Tx, Ty)
  double x = 0.0;
  double y = 0.0;
};

PairConstraint pair_constraint(const PointwiseOperator& t, Variant v, double x, double y);

/// Pair (or symmetric pair combination) whose constraint limits the
/// parameters. `bound` is the implied lower bound on alpha+beta+gamma;
/// it is conclusive when the constraint alone excludes the whole admissible
/// region.
struct Witness {
  double x = 0.0;
  double y = 0.0;
  double bound = 0.0;
  bool conclusive = false;
  /// Constraint is w*(x,y) + (1-w)*(y,x) rather than (x,y) alone.
  bool symmetric = false;
  double weight = 1.0;
};

struct ContractionCertificate {
  Variant variant = Variant::Ciric;
  bool feasible = false;
  std::optional<ContractionParams> params;
  double margin = 0.0;  // min RHS - LHS over the constraints, at params
  std::optional<Witness> witness;
  std::size_t grid_n = 0;
  std::size_t pairs = 0;
  std::size_t skipped = 0;  // pairs with H < 1e-14 that constrain nothing
  bool sampled = false;     // operator was a black-box callable
};

struct CertifyOptions {
  std::size_t grid_n = 501;
  double margin_req = 0.0;
  double initial_step = 0.05;
  int refinements = 3;
};

ContractionCertificate certify_contraction(const PointwiseOperator& t, Variant variant,
                                           const CertifyOptions& opts = {});

/// Largest value of A*alpha + B*beta + C*gamma over the admissible region.
double region_max(Variant v, double a, double b, double c);

enum class RatioKind { Hausdorff, Gap };

struct RatioEstimate {
  double value = 0.0;
  std::optional<double> argmax;
  std::size_t samples = 0;
  std::size_t skipped = 0;
};

constexpr double ratio_skip_eps = 1e-14;
constexpr double strict_check_tol = 1e-9;

/// sup over grid x != x* of H(T(x),{x*}) / H(TG(x),{x*}), or the gap
/// analogue. Throws StrictFixedPointMismatch unless x* is strict for both.
RatioEstimate sup_ratio_l(const PointwiseOperator& t, const PointwiseOperator& tg, double xstar,
                          std::size_t grid_n, RatioKind kind = RatioKind::Hausdorff);

/// sup over grid x of D(x, TG(x)) / D(x, T(x)); +inf when only the
/// denominator vanishes.
RatioEstimate displacement_constant_L(const PointwiseOperator& t, const PointwiseOperator& tg,
                                      std::size_t grid_n);

struct RetractionCheck {
  double xi_max = 0.0;
  bool holds = false;
  std::size_t samples = 0;
  std::size_t skipped = 0;
};

/// Largest xi in (0,1) with |x - x*| <= (1+gamma) L / ((1-alpha-beta) xi) * D(x,T(x))
/// on the grid, found by bisection.
RetractionCheck retraction_displacement_check(const PointwiseOperator& t, const ContractionParams& p,
                                              double L, double xstar, std::size_t grid_n);

struct CorollaryK {
  double value = 0.0;
  bool in_unit = false;
};

/// (alpha+beta)/(1-gamma); ParameterRange for gamma >= 1.
CorollaryK corollary_k(const ContractionParams& p);

struct AuxiliaryConstants {
  std::optional<double> l;
  bool valid_l = false;
  double k = 0.0;
  double L = 0.0;
  double xi = 0.0;
};

nlohmann::json to_json(const ContractionParams& p);
ContractionParams params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ContractionCertificate& c);
ContractionCertificate certificate_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AuxiliaryConstants& c);
AuxiliaryConstants constants_from_json(const nlohmann::json& j);

}  // namespace setfix
