#pragma once

// Bounded, executable checks of stability properties of the strict fixed
// point problem T(x) = {x}: data dependence, Ulam-Hyers, well-posedness,
// Ostrowski, quasi-contraction. Each check returns a verdict together with
// the explicit constant it tested.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "setfix/certify.hpp"
#include "setfix/operator.hpp"

namespace setfix {

enum class StabilityProperty {
  DataDependence,
  PsiMPDataDependence,
  UlamHyers,
  WellPosed,
  Ostrowski,
  QuasiContraction,
  WeakQuasiContraction,
};

enum class Verdict { Holds, Fails, NotApplicable };

std::string_view to_string(StabilityProperty p) noexcept;
std::string_view to_string(Verdict v) noexcept;
StabilityProperty property_from_string(std::string_view s);
Verdict verdict_from_string(std::string_view s);

/// Absolute slack added to every right-hand side.
constexpr double bound_slack = 1e-9;

struct StabilityReport {
  StabilityProperty property = StabilityProperty::DataDependence;
  Verdict verdict = Verdict::Fails;
  bool holds = false;       // worst_ratio <= 1 + 1e-9
  double constant = 0.0;    // the constant used in the checked bound
  std::size_t samples = 0;
  double worst_ratio = 0.0;  // max LHS / (RHS + 1e-9); +inf when not applicable
  std::optional<double> witness;  // sample attaining worst_ratio
  std::map<std::string, double> metrics;
  std::map<std::string, std::string> notes;
};

/// Sets holds and verdict from worst_ratio.
void finalize(StabilityReport& r);
/// A report for a check whose premise does not hold.
StabilityReport not_applicable(StabilityProperty p, const std::string& reason);

struct ComparisonFunction {
  enum class Kind { Linear, PowerLaw };
  Kind kind = Kind::Linear;
  double C = 1.0;
  double p = 1.0;

  /// C*t or C*t^p; ParameterRange unless C > 0 (and p > 0).
  static ComparisonFunction linear(double C);
  static ComparisonFunction power_law(double C, double p);
  double operator()(double t) const noexcept;
  std::string describe() const;
};

/// r_n = initial * ratio^n.
struct DecaySequence {
  double initial = 0.1;
  double ratio = 0.5;

  double operator()(std::size_t n) const noexcept;
  /// r_n -> 0 (including the all-zero sequence).
  bool decays() const noexcept { return initial == 0.0 || (ratio >= 0.0 && ratio < 1.0); }
};

/// Graph translation F(x) = T(x - delta) + delta, both steps clipped to the
/// domain. Sampled: only pointwise evaluation is available.
PointwiseOperator translated(const MultivaluedOperator& t, double delta);
/// F(x) = {c}.
PointwiseOperator constant_operator(const Domain& d, double c);

/// |y* - x*| <= K~ * eta with eta = max_x H(T(x), F(x)) and
/// K~ = L(1+gamma) / ((1-alpha-beta) xi), for each strict fixed point y* of F.
StabilityReport data_dependence_verify(const PointwiseOperator& t, const PointwiseOperator& f,
                                       const ContractionParams& p, double L, double xi, std::size_t grid_n);

/// Premise |x - x*| <= psi(D(x, TG(x))) and D(x,TG(x)) <= c D(x,T(x)) on the
/// grid (HypothesisFailed otherwise); then checks |x - x*| <= psi(c D(x,T(x)))
/// and |x* - y*| <= psi(c eta).
StabilityReport psi_mp_data_dependence(const PointwiseOperator& t, const PointwiseOperator& f,
                                       const PointwiseOperator& tg, const ComparisonFunction& psi, double c,
                                       double xstar, std::size_t grid_n);

struct UlamHyersOptions {
  std::vector<double> eps_list{0.1, 0.05, 0.01};
  std::size_t samples_per_eps = 50;
  std::size_t grid_n = 20'001;
};

/// Every sampled y with D(y, T(y)) <= eps satisfies |y - x*| <= c*eps,
/// c = L(1+beta)/(1-alpha-beta-gamma).
StabilityReport ulam_hyers_verify(const PointwiseOperator& t, const PointwiseOperator& tg, const ContractionParams& p,
                                  double L, double xstar, const UlamHyersOptions& opts = {});

/// Builds u_n with D(u_n, T(u_n)) in [r_n/2, r_n] and checks
/// |u_n - x*| <= c D(u_n,T(u_n)) together with |u_{n_max} - x*| < conv_tol.
StabilityReport well_posedness_verify(const PointwiseOperator& t, const ContractionParams& p, double L,
                                      double xstar, const DecaySequence& r, std::size_t n_max,
                                      double conv_tol = 1e-4);

struct OstrowskiOptions {
  DecaySequence delta{0.1, 0.5};
  std::size_t n_max = 60;
  double conv_tol = 1e-6;
};

/// Perturbed selection orbit v_{n+1} = nearest(T(v_n), v_n) + (-1)^n delta_n.
/// The verdict covers convergence, the residual bound D(v_{n+1},T(v_n)) <= delta_n
/// and the recursive bound
///   |v_{n+1}-x*| <= (1+gamma)/(1-gamma) CT(k, D(v_{j+1},TG(v_j)), n) + k^{n+1} |v_0-x*|.
/// The weighted sum without the initial term,
///   L(1+gamma)/(1-gamma) CT(k, D(v_{j+1},T(v_j)), n),
/// is measured as metric "weighted_bound_worst_ratio" only.
StabilityReport ostrowski_verify(const PointwiseOperator& t, const PointwiseOperator& tg, const ContractionParams& p,
                                 double L, double xstar, double x0, const OstrowskiOptions& opts = {});

/// H(T(x),{x*}) <= l k |x - x*| (or the gap version when weak), k = (alpha+beta)/(1-gamma).
/// ParameterRange when l k >= 1.
StabilityReport quasi_contraction_verify(const PointwiseOperator& t, double l, const ContractionParams& p,
                                         double xstar, std::size_t grid_n, bool weak);

/// c_n = sum_{j<=n} k^{n-j} b_j by c_n = k c_{n-1} + b_n.
double cauchy_toeplitz_sum(double k, const std::vector<double>& b, std::size_t n);

struct DecayCheck {
  bool holds = true;
  double factor = 0.0;        // l*k
  double worst_excess = 0.0;  // max h_n - (lk)^n |x0 - x*|
  std::size_t checked = 0;
};

/// h_n = H(T^n(x0), {x*}) <= (l k)^n |x0 - x*| + 1e-9 for n <= n_max.
DecayCheck geometric_decay_check(const MultivaluedOperator& t, double l, double k, double xstar,
                                 const std::vector<double>& x0s, std::size_t n_max = 30);

nlohmann::json to_json(const StabilityReport& r);
StabilityReport stability_report_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DecaySequence& s);
DecaySequence decay_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ComparisonFunction& psi);
ComparisonFunction comparison_from_json(const nlohmann::json& j);

}  // namespace setfix
