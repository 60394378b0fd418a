#include "setfix/operator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "setfix/error.hpp"
#include "setfix/grid.hpp"

namespace setfix {

namespace {

constexpr double sample_step = 1e-4;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string piece_label(std::size_t i, const Interval& sub) {
  return "piece " + std::to_string(i) + " [" + fmt(sub.lo) + ", " + fmt(sub.hi) + "]";
}

}  // namespace

double domain_eps(const Domain& d) noexcept {
  return 1e-12 * std::max({1.0, std::abs(d.lo()), std::abs(d.hi())});
}

MultivaluedOperator::MultivaluedOperator(Domain domain, std::vector<Piece> pieces, std::string name)
    : domain_(domain), pieces_(std::move(pieces)), name_(std::move(name)) {
  if (pieces_.empty()) throw Error(ErrorCode::InvalidOperator, "operator needs at least one piece");
  const double eps = domain_eps(domain_);
  if (pieces_.front().sub.lo != domain_.lo() || pieces_.back().sub.hi != domain_.hi()) {
    throw Error(ErrorCode::InvalidOperator, "pieces must start at domain.lo and end at domain.hi");
  }
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const Piece& pc = pieces_[i];
    const std::string label = piece_label(i, pc.sub);
    if (!(pc.sub.lo < pc.sub.hi)) throw Error(ErrorCode::InvalidOperator, label + " is degenerate");
    if (i + 1 < pieces_.size() && pc.sub.hi != pieces_[i + 1].sub.lo) {
      throw Error(ErrorCode::InvalidOperator, label + " does not abut the next piece");
    }
    for (const BoundaryFn* f : {&pc.lower, &pc.upper}) {
      if (!f->base().defined_on(pc.sub)) {
        throw Error(ErrorCode::InvalidOperator, label + ": " + std::string(to_string(f->base().kind)) +
                                                    " term undefined on the piece");
      }
      const auto ext = f->extrema(pc.sub.lo, pc.sub.hi);
      if (!ext.empty()) {
        throw Error(ErrorCode::InvalidOperator,
                    label + ": boundary function not monotone, split at " + fmt(ext.front()));
      }
      const Interval r = f->range(pc.sub.lo, pc.sub.hi);
      if (r.lo < domain_.lo() - eps || r.hi > domain_.hi() + eps) {
        throw Error(ErrorCode::InvalidOperator, label + ": values [" + fmt(r.lo) + ", " + fmt(r.hi) +
                                                    "] leave the domain (not a self-map)");
      }
    }
    const auto n = static_cast<std::size_t>(std::ceil(pc.sub.width() / sample_step)) + 1;
    for (double x : uniform_grid(pc.sub, std::max<std::size_t>(n, 2))) {
      if (pc.lower(x) > pc.upper(x) + eps) {
        throw Error(ErrorCode::InvalidOperator, label + ": lower > upper at x = " + fmt(x));
      }
    }
  }
}

std::size_t MultivaluedOperator::piece_index(double x) const {
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), x,
                             [](double v, const Piece& p) { return v < p.sub.lo; });
  return it == pieces_.begin() ? 0 : static_cast<std::size_t>(it - pieces_.begin()) - 1;
}

IntervalUnion MultivaluedOperator::eval(double x) const {
  const double eps = domain_eps(domain_);
  if (!(x >= domain_.lo() - eps && x <= domain_.hi() + eps)) {
    throw Error(ErrorCode::OutOfDomain, "x = " + fmt(x) + " outside the domain of " + name_);
  }
  x = std::clamp(x, domain_.lo(), domain_.hi());
  const Piece& pc = pieces_[piece_index(x)];
  double l = pc.lower(x);
  double u = pc.upper(x);
  if (l > u) std::swap(l, u);
  return IntervalUnion::of(std::clamp(l, domain_.lo(), domain_.hi()), std::clamp(u, domain_.lo(), domain_.hi()));
}

IntervalUnion MultivaluedOperator::set_image(const IntervalUnion& y) const {
  const double eps = domain_eps(domain_);
  const double dlo = domain_.lo();
  const double dhi = domain_.hi();
  std::vector<Interval> out;
  for (const auto& part : y.parts()) {
    if (part.lo < dlo - eps || part.hi > dhi + eps) {
      throw Error(ErrorCode::OutOfDomain, "set part [" + fmt(part.lo) + ", " + fmt(part.hi) +
                                              "] outside the domain of " + name_);
    }
    const double plo = std::clamp(part.lo, dlo, dhi);
    const double phi = std::clamp(part.hi, dlo, dhi);
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      const Piece& pc = pieces_[i];
      if (phi < pc.sub.lo) break;
      const bool last = i + 1 == pieces_.size();
      if (plo > pc.sub.hi || (!last && plo == pc.sub.hi)) continue;
      // closure of T over the (half-open) intersection
      const double a = std::max(plo, pc.sub.lo);
      const double b = std::min(phi, pc.sub.hi);
      const Interval lr = pc.lower.range(a, b);
      const Interval ur = pc.upper.range(a, b);
      out.push_back({std::clamp(std::min(lr.lo, ur.lo), dlo, dhi), std::clamp(std::max(lr.hi, ur.hi), dlo, dhi)});
    }
  }
  return IntervalUnion(out);
}

PointwiseOperator::PointwiseOperator(const MultivaluedOperator& op)
    : domain_(op.domain()), fn_([op](double x) { return op.eval(x); }), name_(op.name()), exact_(true) {}

PointwiseOperator::PointwiseOperator(Domain domain, Fn fn, std::string name)
    : domain_(domain), fn_(std::move(fn)), name_(std::move(name)), exact_(false) {}

IntervalUnion PointwiseOperator::eval(double x) const {
  const double eps = domain_eps(domain_);
  if (!(x >= domain_.lo() - eps && x <= domain_.hi() + eps)) {
    throw Error(ErrorCode::OutOfDomain, "x = " + fmt(x) + " outside the domain of " + name_);
  }
  return fn_(std::clamp(x, domain_.lo(), domain_.hi()));
}

PerturbationSpec PerturbationSpec::takahashi(double lam) {
  if (!(lam > 0.0 && lam < 1.0)) {
    throw Error(ErrorCode::ParameterRange, "Takahashi weight " + fmt(lam) + " must lie in (0,1)");
  }
  return PerturbationSpec(true, LinearG{lam, 1.0 - lam, 0.0});
}

PerturbationSpec PerturbationSpec::general(LinearG g) {
  if (!std::isfinite(g.wx) || !std::isfinite(g.wy) || !std::isfinite(g.shift)) {
    throw Error(ErrorCode::ParameterRange, "linear G coefficients must be finite");
  }
  return PerturbationSpec(false, g);
}

double PerturbationSpec::apply(double x, double y) const noexcept {
  return g_.wx * x + g_.wy * y + g_.shift;
}

std::optional<double> PerturbationSpec::lambda() const noexcept {
  if (!takahashi_) return std::nullopt;
  return g_.wx;
}

Blend PerturbationSpec::blend() const noexcept { return {g_.wx, g_.wy, g_.shift}; }

std::string PerturbationSpec::describe() const {
  if (takahashi_) return "takahashi(" + fmt(g_.wx) + ")";
  return "linear(" + fmt(g_.wx) + ", " + fmt(g_.wy) + ", " + fmt(g_.shift) + ")";
}

AxiomReport check_perturbation_axioms(const PerturbationSpec& p, const Domain& dom, std::size_t grid_n) {
  const auto xs = uniform_grid(dom.bounds, grid_n);
  AxiomReport rep;
  rep.grid_n = grid_n;
  for (double x : xs) rep.max_identity_error = std::max(rep.max_identity_error, std::abs(p.apply(x, x) - x));

  double best_sep = -1.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < xs.size(); ++j) {
      if (i == j) continue;
      if (std::abs(p.apply(xs[i], xs[j]) - xs[i]) < axiom_witness_tol) {
        const double sep = std::abs(xs[i] - xs[j]);
        if (sep > best_sep) {
          best_sep = sep;
          rep.witness = std::pair{xs[i], xs[j]};
        }
      }
    }
  }
  rep.passed = rep.max_identity_error < axiom_identity_tol && !rep.witness;
  return rep;
}

MultivaluedOperator perturb(const MultivaluedOperator& t, const PerturbationSpec& p, std::size_t axiom_grid_n) {
  const AxiomReport ax = check_perturbation_axioms(p, t.domain(), axiom_grid_n);
  if (!ax.passed) {
    std::string msg = p.describe() + " fails the admissibility axioms: max |G(x,x)-x| = " + fmt(ax.max_identity_error);
    if (ax.witness) msg += ", G(x,y) = x at (" + fmt(ax.witness->first) + ", " + fmt(ax.witness->second) + ")";
    throw Error(ErrorCode::AxiomViolation, msg);
  }
  const Blend bl = p.blend();
  std::vector<Piece> out;
  for (const Piece& pc : t.pieces()) {
    BoundaryFn lo = pc.lower.then(bl);
    BoundaryFn hi = pc.upper.then(bl);
    if (bl.wv < 0.0) std::swap(lo, hi);

    std::vector<double> cuts = lo.extrema(pc.sub.lo, pc.sub.hi);
    const auto more = hi.extrema(pc.sub.lo, pc.sub.hi);
    cuts.insert(cuts.end(), more.begin(), more.end());
    std::sort(cuts.begin(), cuts.end());
    const double tiny = IntervalUnion::merge_eps;
    std::erase_if(cuts, [&](double c) { return c - pc.sub.lo <= tiny || pc.sub.hi - c <= tiny; });

    double start = pc.sub.lo;
    for (double c : cuts) {
      if (c - start <= tiny) continue;
      out.push_back({{start, c}, lo, hi});
      start = c;
    }
    out.push_back({{start, pc.sub.hi}, lo, hi});
  }
  return MultivaluedOperator(t.domain(), std::move(out), t.name() + "+" + p.describe());
}

namespace builtin {

MultivaluedOperator square_example() {
  const Domain d = Domain::make(-8.0 / 9.0, 8.0 / 9.0);
  const BoundaryFn lower = Term::power(-1.0, 2);
  const BoundaryFn upper = Term::power(1.0, 2);
  return MultivaluedOperator(d, {{{d.lo(), 0.0}, lower, upper}, {{0.0, d.hi()}, lower, upper}},
                             "square_example");
}

MultivaluedOperator sqrt_example() {
  const Domain d = Domain::make(0.25, 4.0);
  const BoundaryFn one = Term::constant(1.0);
  return MultivaluedOperator(d, {{{0.25, 1.0}, one, Term::inv_sqrt(1.0)}, {{1.0, 4.0}, one, Term::sqrt(1.0)}},
                             "sqrt_example");
}

MultivaluedOperator by_name(const std::string& name) {
  if (name == "square_example") return square_example();
  if (name == "sqrt_example") return sqrt_example();
  throw Error(ErrorCode::SchemaError, "unknown built-in operator '" + name + "'");
}

}  // namespace builtin

namespace {

Interval pair_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw Error(ErrorCode::SchemaError, std::string(what) + " must be [lo, hi]");
  }
  return Interval::make(j[0].get<double>(), j[1].get<double>());
}

double field(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw Error(ErrorCode::SchemaError, std::string("'") + key + "' must be a number");
  return j[key].get<double>();
}

}  // namespace

nlohmann::json to_json(const MultivaluedOperator& op) {
  nlohmann::json pieces = nlohmann::json::array();
  for (const auto& pc : op.pieces()) {
    pieces.push_back({{"sub", {pc.sub.lo, pc.sub.hi}}, {"lower", to_json(pc.lower)}, {"upper", to_json(pc.upper)}});
  }
  return {{"name", op.name()}, {"domain", {op.domain().lo(), op.domain().hi()}}, {"pieces", std::move(pieces)}};
}

MultivaluedOperator operator_from_json(const nlohmann::json& j) {
  if (j.is_string()) return builtin::by_name(j.get<std::string>());
  if (!j.is_object() || !j.contains("domain") || !j.contains("pieces") || !j["pieces"].is_array()) {
    throw Error(ErrorCode::SchemaError, "operator must be a built-in name or {\"domain\", \"pieces\"}");
  }
  const Interval b = pair_from_json(j["domain"], "operator domain");
  const Domain d = Domain::make(b.lo, b.hi);
  std::vector<Piece> pieces;
  for (const auto& pj : j["pieces"]) {
    if (!pj.is_object() || !pj.contains("sub") || !pj.contains("lower") || !pj.contains("upper")) {
      throw Error(ErrorCode::SchemaError, "piece needs 'sub', 'lower' and 'upper'");
    }
    pieces.push_back({pair_from_json(pj["sub"], "piece sub"), boundary_fn_from_json(pj["lower"]),
                      boundary_fn_from_json(pj["upper"])});
  }
  return MultivaluedOperator(d, std::move(pieces), j.value("name", std::string("custom")));
}

nlohmann::json to_json(const PerturbationSpec& p) {
  if (p.is_takahashi()) return {{"kind", "takahashi"}, {"lambda", *p.lambda()}};
  return {{"kind", "linear"}, {"wx", p.linear().wx}, {"wy", p.linear().wy}, {"shift", p.linear().shift}};
}

PerturbationSpec perturbation_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw Error(ErrorCode::SchemaError, "perturbation must be an object with a string 'kind'");
  }
  const auto kind = j["kind"].get<std::string>();
  if (kind == "takahashi") {
    if (!j.contains("lambda")) throw Error(ErrorCode::SchemaError, "takahashi perturbation needs 'lambda'");
    return PerturbationSpec::takahashi(field(j, "lambda", 0.0));
  }
  if (kind == "linear") {
    return PerturbationSpec::general({field(j, "wx", 0.0), field(j, "wy", 1.0), field(j, "shift", 0.0)});
  }
  throw Error(ErrorCode::SchemaError, "unknown perturbation kind '" + kind + "'");
}

}  // namespace setfix
