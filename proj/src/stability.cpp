#include "setfix/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "setfix/error.hpp"
#include "setfix/grid.hpp"
#include "setfix/iteration.hpp"
#include "setfix/json_util.hpp"

namespace setfix {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Running maximum of LHS / (RHS + slack), keeping the first sample on ties.
struct Worst {
  double ratio = 0.0;
  std::optional<double> at;
  std::size_t samples = 0;

  void add(double lhs, double rhs, double where) {
    ++samples;
    const double r = lhs / (rhs + bound_slack);
    if (!at || r > ratio) {
      ratio = r;
      at = where;
    }
  }
};

void require_strict(const PointwiseOperator& op, double xstar) {
  const double h = hausdorff(op.eval(xstar), IntervalUnion::point(xstar));
  if (!(h < strict_check_tol)) {
    throw Error(ErrorCode::StrictFixedPointMismatch,
                fmt(xstar) + " is not a strict fixed point of " + op.name() + " (H = " + fmt(h) + ")");
  }
}

double uh_constant(const ContractionParams& p, double L) {
  const double den = 1.0 - p.alpha - p.beta - p.gamma;
  if (!(den > 0.0)) throw Error(ErrorCode::ParameterRange, "alpha + beta + gamma must be < 1");
  if (!(L > 0.0)) throw Error(ErrorCode::ParameterRange, "L must be positive");
  return L * (1.0 + p.beta) / den;
}

double residual(const PointwiseOperator& t, double x) { return dist_point_to_set(x, t.eval(x)); }

}  // namespace

std::string_view to_string(StabilityProperty p) noexcept {
  switch (p) {
    case StabilityProperty::DataDependence: return "data_dependence";
    case StabilityProperty::PsiMPDataDependence: return "psi_mp_data_dependence";
    case StabilityProperty::UlamHyers: return "ulam_hyers";
    case StabilityProperty::WellPosed: return "well_posed";
    case StabilityProperty::Ostrowski: return "ostrowski";
    case StabilityProperty::QuasiContraction: return "quasi_contraction";
    case StabilityProperty::WeakQuasiContraction: return "weak_quasi_contraction";
  }
  return "?";
}

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Fails: return "fails";
    case Verdict::NotApplicable: return "not_applicable";
  }
  return "?";
}

StabilityProperty property_from_string(std::string_view s) {
  for (auto p : {StabilityProperty::DataDependence, StabilityProperty::PsiMPDataDependence,
                 StabilityProperty::UlamHyers, StabilityProperty::WellPosed, StabilityProperty::Ostrowski,
                 StabilityProperty::QuasiContraction, StabilityProperty::WeakQuasiContraction}) {
    if (to_string(p) == s) return p;
  }
  throw Error(ErrorCode::SchemaError, "unknown stability property '" + std::string(s) + "'");
}

Verdict verdict_from_string(std::string_view s) {
  for (auto v : {Verdict::Holds, Verdict::Fails, Verdict::NotApplicable}) {
    if (to_string(v) == s) return v;
  }
  throw Error(ErrorCode::SchemaError, "unknown verdict '" + std::string(s) + "'");
}

void finalize(StabilityReport& r) {
  r.holds = r.worst_ratio <= 1.0 + 1e-9;
  r.verdict = r.holds ? Verdict::Holds : Verdict::Fails;
}

StabilityReport not_applicable(StabilityProperty p, const std::string& reason) {
  StabilityReport r;
  r.property = p;
  r.verdict = Verdict::NotApplicable;
  r.holds = false;
  r.worst_ratio = inf;
  r.notes["not_applicable"] = reason;
  return r;
}

ComparisonFunction ComparisonFunction::linear(double C) {
  if (!(C > 0.0)) throw Error(ErrorCode::ParameterRange, "comparison constant must be positive");
  return {Kind::Linear, C, 1.0};
}

ComparisonFunction ComparisonFunction::power_law(double C, double p) {
  if (!(C > 0.0) || !(p > 0.0)) throw Error(ErrorCode::ParameterRange, "power-law comparison needs C > 0, p > 0");
  return {Kind::PowerLaw, C, p};
}

double ComparisonFunction::operator()(double t) const noexcept {
  if (t <= 0.0) return 0.0;
  return kind == Kind::Linear ? C * t : C * std::pow(t, p);
}

std::string ComparisonFunction::describe() const {
  return kind == Kind::Linear ? "linear(" + fmt(C) + ")" : "power_law(" + fmt(C) + ", " + fmt(p) + ")";
}

double DecaySequence::operator()(std::size_t n) const noexcept {
  return initial * std::pow(ratio, static_cast<double>(n));
}

PointwiseOperator translated(const MultivaluedOperator& t, double delta) {
  const Domain d = t.domain();
  auto fn = [t, delta, d](double x) {
    const IntervalUnion tx = t.eval(std::clamp(x - delta, d.lo(), d.hi()));
    std::vector<Interval> parts;
    for (const auto& p : tx.parts()) {
      parts.push_back({std::clamp(p.lo + delta, d.lo(), d.hi()), std::clamp(p.hi + delta, d.lo(), d.hi())});
    }
    return IntervalUnion(parts);
  };
  return PointwiseOperator(d, fn, t.name() + "+shift(" + fmt(delta) + ")");
}

PointwiseOperator constant_operator(const Domain& d, double c) {
  if (!d.contains(c)) throw Error(ErrorCode::OutOfDomain, "constant value " + fmt(c) + " outside the domain");
  return PointwiseOperator(d, [c](double) { return IntervalUnion::point(c); }, "const(" + fmt(c) + ")");
}

StabilityReport data_dependence_verify(const PointwiseOperator& t, const PointwiseOperator& f,
                                       const ContractionParams& p, double L, double xi, std::size_t grid_n) {
  if (!(xi > 0.0 && xi < 1.0)) throw Error(ErrorCode::ParameterRange, "xi must lie in (0,1)");
  if (!(p.alpha + p.beta < 1.0)) throw Error(ErrorCode::ParameterRange, "alpha + beta must be < 1");
  const auto st = scan_fixed_points(t, grid_n);
  if (st.strict.empty()) throw Error(ErrorCode::NoStrictFixedPoint, t.name() + " has no strict fixed point");
  const auto sf = scan_fixed_points(f, grid_n);
  if (sf.strict.empty()) throw Error(ErrorCode::NoStrictFixedPoint, f.name() + " has no strict fixed point");
  if (st.strict.size() > 1) {
    return not_applicable(StabilityProperty::DataDependence, "strict fixed point of " + t.name() + " is not unique");
  }
  const double xstar = st.strict.front();

  const auto xs = uniform_grid(t.domain().bounds, grid_n);
  std::vector<double> h(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) { h[i] = hausdorff(t.eval(xs[i]), f.eval(xs[i])); });
  const double eta = *std::max_element(h.begin(), h.end());
  const double ktilde = L * (1.0 + p.gamma) / ((1.0 - p.alpha - p.beta) * xi);

  StabilityReport r;
  r.property = StabilityProperty::DataDependence;
  r.constant = ktilde;
  Worst w;
  for (double y : sf.strict) w.add(std::abs(y - xstar), ktilde * eta, y);
  r.samples = w.samples;
  r.worst_ratio = w.ratio;
  r.witness = w.at;
  r.metrics = {{"eta", eta}, {"x_star", xstar}, {"xi", xi}, {"L", L}, {"grid_n", double(grid_n)},
               {"strict_points_F", double(sf.strict.size())}};
  if (!f.exact()) r.notes["F"] = "sampled";
  finalize(r);
  return r;
}

StabilityReport psi_mp_data_dependence(const PointwiseOperator& t, const PointwiseOperator& f,
                                       const PointwiseOperator& tg, const ComparisonFunction& psi, double c,
                                       double xstar, std::size_t grid_n) {
  if (!(c > 0.0)) throw Error(ErrorCode::ParameterRange, "c must be positive");
  require_strict(t, xstar);
  require_strict(tg, xstar);
  const auto xs = uniform_grid(t.domain().bounds, grid_n);
  std::vector<double> dt(xs.size());
  std::vector<double> dg(xs.size());
  std::vector<double> h(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) {
    dt[i] = residual(t, xs[i]);
    dg[i] = residual(tg, xs[i]);
    h[i] = hausdorff(t.eval(xs[i]), f.eval(xs[i]));
  });

  Worst premise;
  Worst displacement;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    premise.add(std::abs(xs[i] - xstar), psi(dg[i]), xs[i]);
    displacement.add(dg[i], c * dt[i], xs[i]);
  }
  if (premise.ratio > 1.0 + 1e-9) {
    throw Error(ErrorCode::HypothesisFailed, "retraction-displacement premise with psi = " + psi.describe() +
                                                 " fails at x = " + fmt(*premise.at) + " (ratio " +
                                                 fmt(premise.ratio) + ")");
  }
  if (displacement.ratio > 1.0 + 1e-9) {
    throw Error(ErrorCode::HypothesisFailed, "D(x,TG(x)) <= c D(x,T(x)) fails at x = " + fmt(*displacement.at) +
                                                 " for c = " + fmt(c));
  }

  Worst w;
  for (std::size_t i = 0; i < xs.size(); ++i) w.add(std::abs(xs[i] - xstar), psi(c * dt[i]), xs[i]);
  const double pointwise = w.ratio;
  const double eta = *std::max_element(h.begin(), h.end());
  const auto sf = scan_fixed_points(f, grid_n);
  if (sf.strict.empty()) throw Error(ErrorCode::NoStrictFixedPoint, f.name() + " has no strict fixed point");
  Worst wy;
  for (double y : sf.strict) wy.add(std::abs(y - xstar), psi(c * eta), y);

  StabilityReport r;
  r.property = StabilityProperty::PsiMPDataDependence;
  r.constant = c;
  r.samples = w.samples + wy.samples;
  r.worst_ratio = std::max(w.ratio, wy.ratio);
  r.witness = w.ratio >= wy.ratio ? w.at : wy.at;
  r.metrics = {{"eta", eta},
               {"x_star", xstar},
               {"premise_worst_ratio", premise.ratio},
               {"displacement_worst_ratio", displacement.ratio},
               {"pointwise_worst_ratio", pointwise},
               {"fixed_point_worst_ratio", wy.ratio},
               {"psi_C", psi.C},
               {"psi_p", psi.p}};
  r.notes["psi"] = psi.describe();
  finalize(r);
  return r;
}

StabilityReport ulam_hyers_verify(const PointwiseOperator& t, const PointwiseOperator& tg, const ContractionParams& p,
                                  double L, double xstar, const UlamHyersOptions& opts) {
  require_strict(t, xstar);
  require_strict(tg, xstar);
  const double c = uh_constant(p, L);
  const auto xs = uniform_grid(t.domain().bounds, opts.grid_n);
  std::vector<double> rho(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) { rho[i] = residual(t, xs[i]); });

  StabilityReport r;
  r.property = StabilityProperty::UlamHyers;
  r.constant = c;
  Worst w;
  std::string unsampled;
  for (double eps : opts.eps_list) {
    if (!(eps > 0.0)) throw Error(ErrorCode::ParameterRange, "eps must be positive");
    std::vector<std::size_t> cand;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (rho[i] <= eps) cand.push_back(i);
    }
    std::vector<std::size_t> pick;
    if (cand.size() <= opts.samples_per_eps || opts.samples_per_eps < 2) {
      pick = cand;
    } else {
      for (std::size_t s = 0; s < opts.samples_per_eps; ++s) {
        pick.push_back(cand[s * (cand.size() - 1) / (opts.samples_per_eps - 1)]);
      }
    }
    if (pick.empty()) unsampled += (unsampled.empty() ? "" : ",") + fmt(eps);
    for (std::size_t i : pick) w.add(std::abs(xs[i] - xstar), c * eps, xs[i]);
    r.metrics["samples_eps_" + fmt(eps)] = double(pick.size());
    r.metrics["candidates_eps_" + fmt(eps)] = double(cand.size());
  }
  if (w.samples == 0) {
    throw Error(ErrorCode::NoApproximateSolutions, "no grid point is an eps-solution for eps in {" + unsampled + "}");
  }
  if (!unsampled.empty()) r.notes["unsampled_eps"] = unsampled;
  r.notes["L"] = "there exists L > 0 with D(x,TG(x)) <= L D(x,T(x))";
  r.samples = w.samples;
  r.worst_ratio = w.ratio;
  r.witness = w.at;
  r.metrics["x_star"] = xstar;
  r.metrics["L"] = L;
  r.metrics["grid_n"] = double(opts.grid_n);
  finalize(r);
  return r;
}

StabilityReport well_posedness_verify(const PointwiseOperator& t, const ContractionParams& p, double L,
                                      double xstar, const DecaySequence& seq, std::size_t n_max, double conv_tol) {
  const double c = uh_constant(p, L);
  if (!seq.decays()) {
    auto r = not_applicable(StabilityProperty::WellPosed, "residual targets do not decay to 0");
    r.constant = c;
    return r;
  }
  require_strict(t, xstar);
  const Domain& d = t.domain();

  // bisection between x* (residual 0) and the domain end on one side
  auto on_side = [&](double target, double end) -> std::optional<double> {
    if (residual(t, end) < target / 2) return std::nullopt;
    double a = xstar;
    double b = end;
    if (residual(t, end) <= target) return end;
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (a + b);
      if (m == a || m == b) break;
      const double rm = residual(t, m);
      if (rm >= target / 2 && rm <= target) return m;
      if (rm < target / 2) {
        a = m;
      } else {
        b = m;
      }
    }
    return std::nullopt;
  };

  StabilityReport r;
  r.property = StabilityProperty::WellPosed;
  r.constant = c;
  Worst w;
  double last = 0.0;
  for (std::size_t n = 0; n <= n_max; ++n) {
    const double target = seq(n);
    double u = xstar;
    if (target > 0.0) {
      const double first = n % 2 == 0 ? d.hi() : d.lo();
      const double second = n % 2 == 0 ? d.lo() : d.hi();
      auto got = on_side(target, first);
      if (!got) got = on_side(target, second);
      if (!got) {
        throw Error(ErrorCode::ConstructionFailed,
                    "no point with residual in [" + fmt(target / 2) + ", " + fmt(target) + "] at n = " +
                        std::to_string(n));
      }
      u = *got;
    }
    w.add(std::abs(u - xstar), c * residual(t, u), u);
    last = std::abs(u - xstar);
  }
  r.samples = w.samples;
  r.metrics = {{"bound_worst_ratio", w.ratio}, {"final_distance", last}, {"conv_tol", conv_tol},
               {"x_star", xstar}, {"L", L}, {"r0", seq.initial}, {"rho", seq.ratio},
               {"n_max", double(n_max)}};
  r.worst_ratio = std::max(w.ratio, last / conv_tol);
  r.witness = w.ratio >= last / conv_tol ? w.at : std::optional<double>(last);
  finalize(r);
  return r;
}

StabilityReport ostrowski_verify(const PointwiseOperator& t, const PointwiseOperator& tg, const ContractionParams& p,
                                 double L, double xstar, double x0, const OstrowskiOptions& opts) {
  if (!(p.gamma < 1.0)) throw Error(ErrorCode::ParameterRange, "gamma must be < 1");
  require_strict(t, xstar);
  require_strict(tg, xstar);
  const Domain& d = t.domain();
  if (!d.contains(x0)) throw Error(ErrorCode::OutOfDomain, "x0 = " + fmt(x0) + " outside the domain");
  const double k = (p.alpha + p.beta) / (1.0 - p.gamma);
  const double k_printed = p.alpha < 1.0 ? (p.alpha + p.beta) / (1.0 - p.alpha) : inf;
  const double pre = (1.0 + p.gamma) / (1.0 - p.gamma);

  std::vector<double> v{x0};
  std::vector<double> res_t;   // D(v_{j+1}, T(v_j))
  std::vector<double> res_tg;  // D(v_{j+1}, TG(v_j))
  Worst resid;
  Worst recursive;
  Worst weighted;
  double ct_t = 0.0;
  double ct_g = 0.0;
  for (std::size_t n = 0; n < opts.n_max; ++n) {
    const double vn = v.back();
    const IntervalUnion tv = t.eval(vn);
    const double sigma = n % 2 == 0 ? 1.0 : -1.0;
    const double delta = opts.delta(n);
    const double next = std::clamp(nearest_point(vn, tv) + sigma * delta, d.lo(), d.hi());
    v.push_back(next);
    res_t.push_back(dist_point_to_set(next, tv));
    res_tg.push_back(dist_point_to_set(next, tg.eval(vn)));
    resid.add(res_t.back(), delta, next);
    ct_t = k * ct_t + res_t.back();
    ct_g = k * ct_g + res_tg.back();
    const double dist = std::abs(next - xstar);
    recursive.add(dist, pre * ct_g + std::pow(k, double(n + 1)) * std::abs(x0 - xstar), next);
    weighted.add(dist, L * pre * ct_t, next);
  }
  const double final_dist = std::abs(v.back() - xstar);

  StabilityReport r;
  r.property = StabilityProperty::Ostrowski;
  r.constant = L * pre;
  r.samples = res_t.size();
  r.metrics = {{"k_derived", k},
               {"k_printed", k_printed},
               {"final_distance", final_dist},
               {"conv_tol", opts.conv_tol},
               {"x_star", xstar},
               {"x0", x0},
               {"L", L},
               {"delta0", opts.delta.initial},
               {"delta_ratio", opts.delta.ratio},
               {"n_max", double(opts.n_max)},
               {"residual_worst_ratio", resid.ratio},
               {"recursive_bound_worst_ratio", recursive.ratio},
               {"weighted_bound_worst_ratio", weighted.ratio}};
  if (!opts.delta.decays()) {
    auto na = not_applicable(StabilityProperty::Ostrowski, "perturbations delta_n do not decay to 0");
    na.constant = r.constant;
    na.samples = r.samples;
    na.metrics = r.metrics;
    return na;
  }
  if (!(k < 1.0)) {
    auto na = not_applicable(StabilityProperty::Ostrowski, "k = (alpha+beta)/(1-gamma) is not below 1");
    na.metrics = r.metrics;
    return na;
  }
  const double conv = final_dist / opts.conv_tol;
  r.worst_ratio = std::max({resid.ratio, recursive.ratio, conv});
  r.witness = recursive.ratio >= resid.ratio ? recursive.at : resid.at;
  if (conv > std::max(resid.ratio, recursive.ratio)) r.witness = v.back();
  finalize(r);
  return r;
}

StabilityReport quasi_contraction_verify(const PointwiseOperator& t, double l, const ContractionParams& p,
                                         double xstar, std::size_t grid_n, bool weak) {
  const double k = corollary_k(p).value;
  const double eff = l * k;
  if (!(eff < 1.0)) throw Error(ErrorCode::ParameterRange, "l * k = " + fmt(eff) + " is not below 1");
  require_strict(t, xstar);
  const auto xs = uniform_grid(t.domain().bounds, grid_n);
  const IntervalUnion star = IntervalUnion::point(xstar);
  std::vector<double> lhs(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) {
    const IntervalUnion tx = t.eval(xs[i]);
    lhs[i] = weak ? dist_point_to_set(xstar, tx) : hausdorff(tx, star);
  });
  Worst w;
  for (std::size_t i = 0; i < xs.size(); ++i) w.add(lhs[i], eff * std::abs(xs[i] - xstar), xs[i]);
  StabilityReport r;
  r.property = weak ? StabilityProperty::WeakQuasiContraction : StabilityProperty::QuasiContraction;
  r.constant = eff;
  r.samples = w.samples;
  r.worst_ratio = w.ratio;
  r.witness = w.at;
  r.metrics = {{"l", l}, {"k", k}, {"x_star", xstar}, {"grid_n", double(grid_n)}};
  finalize(r);
  return r;
}

double cauchy_toeplitz_sum(double k, const std::vector<double>& b, std::size_t n) {
  if (!(k > 0.0 && k < 1.0)) throw Error(ErrorCode::ParameterRange, "k = " + fmt(k) + " outside (0,1)");
  if (b.size() < n + 1) throw Error(ErrorCode::ParameterRange, "sequence b needs at least n+1 terms");
  double c = 0.0;
  for (std::size_t j = 0; j <= n; ++j) {
    if (!(b[j] >= 0.0)) throw Error(ErrorCode::ParameterRange, "sequence b must be nonnegative");
    c = k * c + b[j];
  }
  return c;
}

DecayCheck geometric_decay_check(const MultivaluedOperator& t, double l, double k, double xstar,
                                 const std::vector<double>& x0s, std::size_t n_max) {
  DecayCheck dc;
  dc.factor = l * k;
  dc.worst_excess = -inf;
  for (double x0 : x0s) {
    OrbitOptions o;
    o.max_n = n_max;
    o.tol = std::numeric_limits<double>::denorm_min();
    o.target = xstar;
    const auto tr = picard_orbit(t, x0, o);
    for (const auto& st : tr.steps) {
      const double bound = std::pow(dc.factor, double(st.n)) * std::abs(x0 - xstar);
      const double excess_n = *st.h_to_target - bound;
      dc.worst_excess = std::max(dc.worst_excess, excess_n);
      ++dc.checked;
      if (excess_n > 1e-9) dc.holds = false;
    }
  }
  return dc;
}

nlohmann::json to_json(const StabilityReport& r) {
  nlohmann::json metrics = nlohmann::json::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = real_to_json(v);
  return {{"property", std::string(to_string(r.property))},
          {"verdict", std::string(to_string(r.verdict))},
          {"holds", r.holds},
          {"constant", real_to_json(r.constant)},
          {"samples", r.samples},
          {"worst_ratio", real_to_json(r.worst_ratio)},
          {"witness", opt_to_json(r.witness)},
          {"metrics", std::move(metrics)},
          {"notes", r.notes}};
}

StabilityReport stability_report_from_json(const nlohmann::json& j) {
  try {
    StabilityReport r;
    r.property = property_from_string(j.at("property").get<std::string>());
    r.verdict = verdict_from_string(j.at("verdict").get<std::string>());
    r.holds = j.at("holds").get<bool>();
    r.constant = real_from_json(j.at("constant"));
    r.samples = j.at("samples").get<std::size_t>();
    r.worst_ratio = real_from_json(j.at("worst_ratio"));
    r.witness = opt_from_json(j.at("witness"));
    for (const auto& [k, v] : j.at("metrics").items()) r.metrics[k] = real_from_json(v);
    r.notes = j.at("notes").get<std::map<std::string, std::string>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("stability report: ") + e.what());
  }
}

nlohmann::json to_json(const DecaySequence& s) { return {{"initial", s.initial}, {"ratio", s.ratio}}; }

DecaySequence decay_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::SchemaError, "sequence must be {\"initial\", \"ratio\"}");
  DecaySequence s;
  s.initial = j.value("initial", s.initial);
  s.ratio = j.value("ratio", s.ratio);
  if (!(s.initial >= 0.0)) throw Error(ErrorCode::SchemaError, "sequence initial value must be >= 0");
  return s;
}

nlohmann::json to_json(const ComparisonFunction& psi) {
  if (psi.kind == ComparisonFunction::Kind::Linear) return {{"kind", "linear"}, {"C", psi.C}};
  return {{"kind", "power_law"}, {"C", psi.C}, {"p", psi.p}};
}

ComparisonFunction comparison_from_json(const nlohmann::json& j) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "linear") return ComparisonFunction::linear(j.at("C").get<double>());
    if (kind == "power_law") return ComparisonFunction::power_law(j.at("C").get<double>(), j.at("p").get<double>());
    throw Error(ErrorCode::SchemaError, "unknown comparison function kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("comparison function: ") + e.what());
  }
}

}  // namespace setfix
