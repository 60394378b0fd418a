#include "setfix/certify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "setfix/error.hpp"
#include "setfix/grid.hpp"
#include "setfix/json_util.hpp"

namespace setfix {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

using Vec3 = std::array<double, 3>;

std::vector<Vec3> region_vertices(Variant v) {
  const double top = 1.0 - simplex_margin;
  if (v == Variant::Ciric) return {{0, 0, 0}, {top, 0, 0}, {0, top, 0}, {0, 0, top}};
  std::vector<Vec3> out;
  for (double g : {0.0, 1.0}) {
    out.push_back({0, 0, g});
    out.push_back({top, 0, g});
    out.push_back({0, top / 2, g});
  }
  return out;
}

double dot(const Vec3& k, const Vec3& v) { return k[0] * v[0] + k[1] * v[1] + k[2] * v[2]; }

struct Combo {
  double weight = 1.0;
  double ratio = 0.0;  // H / region max
  double bound = 0.0;  // H / max coefficient
};

// Best weight w in [0,1] for the constraint w*k1 + (1-w)*k2 >= h: minimizes
// the (convex, piecewise linear) region maximum of the combined coefficients.
Combo best_combination(Variant v, const Vec3& k1, const Vec3& k2, double h) {
  const auto verts = region_vertices(v);
  auto region_at = [&](double w) {
    double m = 0.0;
    for (const auto& vx : verts) m = std::max(m, w * dot(k1, vx) + (1 - w) * dot(k2, vx));
    return m;
  };
  std::vector<double> ws{0.0, 0.5, 1.0};
  for (std::size_t i = 0; i < verts.size(); ++i) {
    for (std::size_t j = i + 1; j < verts.size(); ++j) {
      // f(w) = f2 + w*(f1 - f2) for each vertex; intersect the two lines
      const double s1 = dot(k1, verts[i]) - dot(k2, verts[i]);
      const double s2 = dot(k1, verts[j]) - dot(k2, verts[j]);
      if (s1 == s2) continue;
      const double w = (dot(k2, verts[j]) - dot(k2, verts[i])) / (s1 - s2);
      if (w > 0.0 && w < 1.0) ws.push_back(w);
    }
  }
  std::sort(ws.begin(), ws.end());
  Combo best;
  double best_m = inf;
  for (double w : ws) {
    const double m = region_at(w);
    if (m < best_m) {
      best_m = m;
      best.weight = w;
    }
  }
  const double w = best.weight;
  const double kmax = std::max({w * k1[0] + (1 - w) * k2[0], w * k1[1] + (1 - w) * k2[1], w * k1[2] + (1 - w) * k2[2]});
  best.ratio = best_m > 0.0 ? h / best_m : (h > 0.0 ? inf : 0.0);
  best.bound = kmax > 0.0 ? h / kmax : (h > 0.0 ? inf : 0.0);
  return best;
}

struct Lattice {
  Vec3 p;
  long level;
};

// Smallest slack of the constraints at p; stops at the first slack below req
// and returns -inf then.
double slack_at(const std::vector<PairConstraint>& cs, const Vec3& p, double req) {
  double mn = inf;
  for (const auto& c : cs) {
    const double s = c.a * p[0] + c.b * p[1] + c.c * p[2] - c.h;
    if (s < req) return -inf;
    mn = std::min(mn, s);
  }
  return mn;
}

// Evaluates candidates level by level (increasing parameter sum) and returns
// the feasible point of the lowest level with the largest slack.
std::optional<std::pair<Vec3, double>> search_levels(std::vector<Lattice> pts,
                                                     const std::vector<PairConstraint>& cs, double req) {
  std::stable_sort(pts.begin(), pts.end(), [](const Lattice& a, const Lattice& b) { return a.level < b.level; });
  std::size_t i = 0;
  while (i < pts.size()) {
    std::size_t j = i;
    while (j < pts.size() && pts[j].level == pts[i].level) ++j;
    std::vector<double> slack(j - i);
    parallel_for(j - i, [&](std::size_t q) { slack[q] = slack_at(cs, pts[i + q].p, req); });
    std::optional<std::pair<Vec3, double>> best;
    for (std::size_t q = 0; q < slack.size(); ++q) {
      if (slack[q] == -inf) continue;
      if (!best || slack[q] > best->second) best = std::pair{pts[i + q].p, slack[q]};
    }
    if (best) return best;
    i = j;
  }
  return std::nullopt;
}

bool admissible_vec(Variant v, const Vec3& p) {
  return ContractionParams{p[0], p[1], p[2], v}.admissible();
}

}  // namespace

std::string_view to_string(Variant v) noexcept {
  switch (v) {
    case Variant::Ciric: return "ciric";
    case Variant::CiricReichRus: return "ciric_reich_rus";
    case Variant::Combined: return "combined";
  }
  return "?";
}

Variant variant_from_string(std::string_view s) {
  if (s == "ciric") return Variant::Ciric;
  if (s == "ciric_reich_rus" || s == "crr") return Variant::CiricReichRus;
  if (s == "combined") return Variant::Combined;
  throw Error(ErrorCode::SchemaError, "unknown contraction variant '" + std::string(s) + "'");
}

bool ContractionParams::admissible() const noexcept {
  for (double v : {alpha, beta, gamma}) {
    if (!(v >= 0.0 && v <= 1.0)) return false;
  }
  if (variant == Variant::Ciric) return alpha + beta + gamma <= 1.0 - simplex_margin;
  return alpha + 2.0 * beta <= 1.0 - simplex_margin;
}

double region_max(Variant v, double a, double b, double c) {
  double m = 0.0;
  for (const auto& vx : region_vertices(v)) m = std::max(m, dot({a, b, c}, vx));
  return m;
}

PairConstraint pair_constraint(const PointwiseOperator& t, Variant v, double x, double y) {
  const IntervalUnion tx = t.eval(x);
  const IntervalUnion ty = t.eval(y);
  const double d = std::abs(x - y);
  PairConstraint pc{d, 0.0, 0.0, hausdorff(tx, ty), x, y};
  switch (v) {
    case Variant::Ciric:
      pc.b = dist_point_to_set(x, ty);
      pc.c = dist_point_to_set(y, tx);
      break;
    case Variant::CiricReichRus:
      pc.b = dist_point_to_set(x, tx);
      pc.c = dist_point_to_set(y, ty);
      break;
    case Variant::Combined:
      pc.b = dist_point_to_set(x, tx) + dist_point_to_set(y, ty);
      pc.c = dist_point_to_set(x, ty) + dist_point_to_set(y, tx);
      break;
  }
  return pc;
}

ContractionCertificate certify_contraction(const PointwiseOperator& t, Variant variant, const CertifyOptions& opts) {
  if (!(opts.margin_req >= 0.0)) throw Error(ErrorCode::ParameterRange, "margin_req must be >= 0");
  if (!(opts.initial_step > 0.0 && opts.initial_step <= 1.0)) {
    throw Error(ErrorCode::ParameterRange, "initial lattice step must lie in (0,1]");
  }
  const auto xs = uniform_grid(t.domain().bounds, opts.grid_n);
  const std::size_t n = xs.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!(xs[i] < xs[i + 1])) throw Error(ErrorCode::DegenerateDomain, "grid points collapse at the domain scale");
  }

  ContractionCertificate cert;
  cert.variant = variant;
  cert.grid_n = opts.grid_n;
  cert.sampled = !t.exact();

  // all ordered pairs x != y, row-major so the layout does not depend on threads
  std::vector<PairConstraint> cs(n * (n - 1));
  parallel_for(n, [&](std::size_t i) {
    std::size_t slot = i * (n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) cs[slot++] = pair_constraint(t, variant, xs[i], xs[j]);
    }
  });
  cert.pairs = cs.size();
  cert.skipped = static_cast<std::size_t>(
      std::count_if(cs.begin(), cs.end(), [](const PairConstraint& c) { return c.h < ratio_skip_eps; }));

  // hardest constraints first so infeasible lattice points are rejected early
  std::vector<PairConstraint> order = cs;
  auto hardness = [&](const PairConstraint& c) { return c.h / std::max({c.a, c.b, c.c, 1e-300}); };
  std::stable_sort(order.begin(), order.end(),
                   [&](const PairConstraint& p, const PairConstraint& q) { return hardness(p) > hardness(q); });

  const double req = opts.margin_req * t.domain().width();
  double step = opts.initial_step;
  const long steps = static_cast<long>(std::floor(1.0 / step + 1e-9));
  std::vector<Lattice> coarse;
  for (long i = 0; i <= steps; ++i) {
    for (long j = 0; j <= steps; ++j) {
      for (long k = 0; k <= steps; ++k) {
        const Vec3 p{i * step, j * step, k * step};
        if (admissible_vec(variant, p)) coarse.push_back({p, i + j + k});
      }
    }
  }
  auto found = search_levels(std::move(coarse), order, req);
  if (found) {
    for (int r = 0; r < opts.refinements; ++r) {
      const double fine = step / 2.0;
      std::vector<Lattice> box;
      for (long i = -2; i <= 2; ++i) {
        for (long j = -2; j <= 2; ++j) {
          for (long k = -2; k <= 2; ++k) {
            const Vec3& c = found->first;
            const Vec3 p{c[0] + i * fine, c[1] + j * fine, c[2] + k * fine};
            if (admissible_vec(variant, p)) box.push_back({p, i + j + k});
          }
        }
      }
      if (auto better = search_levels(std::move(box), order, req)) found = better;
      step = fine;
    }
    cert.feasible = true;
    cert.params = ContractionParams{found->first[0], found->first[1], found->first[2], variant};
    cert.margin = slack_at(order, found->first, -inf);
    return cert;
  }

  // infeasible: single pair first, then symmetric pair combinations
  using Ranked = std::pair<Witness, double>;  // witness, H / region max
  std::vector<Ranked> row_single(n, {Witness{}, -1.0});
  std::vector<Ranked> row_sym(n, {Witness{}, -1.0});
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const auto& c = cs[i * (n - 1) + (j < i ? j : j - 1)];
      const double m = region_max(variant, c.a, c.b, c.c);
      const double ratio = m > 0.0 ? c.h / m : (c.h > 0.0 ? inf : 0.0);
      if (ratio > row_single[i].second) {
        const double kmax = std::max({c.a, c.b, c.c});
        row_single[i] = {{c.x, c.y, kmax > 0.0 ? c.h / kmax : inf, ratio > 1.0, false, 1.0}, ratio};
      }
      if (j > i) {
        const auto& rev = cs[j * (n - 1) + i];
        const Combo cb = best_combination(variant, {c.a, c.b, c.c}, {rev.a, rev.b, rev.c}, c.h);
        if (cb.ratio > row_sym[i].second) {
          row_sym[i] = {{c.x, c.y, cb.bound, cb.ratio > 1.0, true, cb.weight}, cb.ratio};
        }
      }
    }
  });
  auto pick = [](const std::vector<Ranked>& rows) {
    Ranked best{Witness{}, -1.0};
    for (const auto& r : rows) {
      if (r.second > best.second) best = r;
    }
    return best;
  };
  const Ranked single = pick(row_single);
  const Ranked sym = pick(row_sym);
  if (single.first.conclusive || !sym.first.conclusive) {
    cert.witness = (single.first.conclusive || single.second >= sym.second) ? single.first : sym.first;
  } else {
    cert.witness = sym.first;
  }
  return cert;
}

RatioEstimate sup_ratio_l(const PointwiseOperator& t, const PointwiseOperator& tg, double xstar, std::size_t grid_n,
                          RatioKind kind) {
  const IntervalUnion star = IntervalUnion::point(xstar);
  for (const PointwiseOperator* op : {&t, &tg}) {
    const double h = hausdorff(op->eval(xstar), star);
    if (!(h < strict_check_tol)) {
      throw Error(ErrorCode::StrictFixedPointMismatch,
                  std::to_string(xstar) + " is not a strict fixed point of " + op->name() +
                      " (H(T(x*),{x*}) = " + std::to_string(h) + ")");
    }
  }
  const auto xs = uniform_grid(t.domain().bounds, grid_n);
  std::vector<double> num(xs.size());
  std::vector<double> den(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) {
    if (kind == RatioKind::Hausdorff) {
      num[i] = hausdorff(t.eval(xs[i]), star);
      den[i] = hausdorff(tg.eval(xs[i]), star);
    } else {
      num[i] = dist_point_to_set(xstar, t.eval(xs[i]));
      den[i] = dist_point_to_set(xstar, tg.eval(xs[i]));
    }
  });
  RatioEstimate est;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] == xstar) continue;
    if (den[i] < ratio_skip_eps) {
      ++est.skipped;
      continue;
    }
    ++est.samples;
    const double r = num[i] / den[i];
    if (!est.argmax || r > est.value) {
      est.value = r;
      est.argmax = xs[i];
    }
  }
  return est;
}

RatioEstimate displacement_constant_L(const PointwiseOperator& t, const PointwiseOperator& tg, std::size_t grid_n) {
  const auto xs = uniform_grid(t.domain().bounds, grid_n);
  std::vector<double> num(xs.size());
  std::vector<double> den(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) {
    num[i] = dist_point_to_set(xs[i], tg.eval(xs[i]));
    den[i] = dist_point_to_set(xs[i], t.eval(xs[i]));
  });
  RatioEstimate est;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (num[i] < ratio_skip_eps && den[i] < ratio_skip_eps) {
      ++est.skipped;
      continue;
    }
    ++est.samples;
    const double r = den[i] < ratio_skip_eps ? inf : num[i] / den[i];
    if (!est.argmax || r > est.value) {
      est.value = r;
      est.argmax = xs[i];
    }
  }
  return est;
}

RetractionCheck retraction_displacement_check(const PointwiseOperator& t, const ContractionParams& p, double L,
                                              double xstar, std::size_t grid_n) {
  if (!(L > 0.0)) throw Error(ErrorCode::ParameterRange, "L must be positive");
  if (!(p.alpha + p.beta < 1.0)) throw Error(ErrorCode::ParameterRange, "alpha + beta must be < 1");
  const auto xs = uniform_grid(t.domain().bounds, grid_n);
  std::vector<double> disp(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) { disp[i] = dist_point_to_set(xs[i], t.eval(xs[i])); });

  RetractionCheck rc;
  std::vector<std::pair<double, double>> pts;  // (|x - x*|, D(x, T(x)))
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = std::abs(xs[i] - xstar);
    if (disp[i] < ratio_skip_eps && dx < 1e-9) {
      ++rc.skipped;
      continue;
    }
    pts.emplace_back(dx, disp[i]);
  }
  rc.samples = pts.size();
  const double base = (1.0 + p.gamma) * L / (1.0 - p.alpha - p.beta);
  auto holds = [&](double xi) {
    const double c = base / xi;
    return std::all_of(pts.begin(), pts.end(), [&](const auto& q) { return q.first <= c * q.second; });
  };
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (holds(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  rc.xi_max = lo;
  rc.holds = lo >= 1e-6;
  return rc;
}

CorollaryK corollary_k(const ContractionParams& p) {
  if (!(p.gamma < 1.0)) throw Error(ErrorCode::ParameterRange, "gamma must be < 1");
  const double v = (p.alpha + p.beta) / (1.0 - p.gamma);
  return {v, v < 1.0};
}

nlohmann::json to_json(const ContractionParams& p) {
  return {{"alpha", p.alpha}, {"beta", p.beta}, {"gamma", p.gamma}, {"variant", std::string(to_string(p.variant))}};
}

ContractionParams params_from_json(const nlohmann::json& j) {
  try {
    ContractionParams p{j.at("alpha").get<double>(), j.at("beta").get<double>(), j.at("gamma").get<double>(),
                        Variant::Ciric};
    if (j.contains("variant")) p.variant = variant_from_string(j["variant"].get<std::string>());
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("contraction params: ") + e.what());
  }
}

nlohmann::json to_json(const ContractionCertificate& c) {
  nlohmann::json j{{"variant", std::string(to_string(c.variant))},
                   {"feasible", c.feasible},
                   {"margin", real_to_json(c.margin)},
                   {"grid_n", c.grid_n},
                   {"pairs", c.pairs},
                   {"skipped", c.skipped},
                   {"sampled", c.sampled}};
  if (c.params) {
    j["alpha"] = c.params->alpha;
    j["beta"] = c.params->beta;
    j["gamma"] = c.params->gamma;
  } else {
    j["alpha"] = j["beta"] = j["gamma"] = nullptr;
  }
  if (c.witness) {
    j["witness"] = {{"x", c.witness->x},
                    {"y", c.witness->y},
                    {"bound", real_to_json(c.witness->bound)},
                    {"conclusive", c.witness->conclusive},
                    {"symmetric", c.witness->symmetric},
                    {"weight", c.witness->weight}};
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

ContractionCertificate certificate_from_json(const nlohmann::json& j) {
  try {
    ContractionCertificate c;
    c.variant = variant_from_string(j.at("variant").get<std::string>());
    c.feasible = j.at("feasible").get<bool>();
    c.margin = real_from_json(j.at("margin"));
    c.grid_n = j.at("grid_n").get<std::size_t>();
    c.pairs = j.at("pairs").get<std::size_t>();
    c.skipped = j.at("skipped").get<std::size_t>();
    c.sampled = j.at("sampled").get<bool>();
    if (!j.at("alpha").is_null()) {
      c.params = ContractionParams{j["alpha"].get<double>(), j["beta"].get<double>(), j["gamma"].get<double>(),
                                   c.variant};
    }
    if (const auto& w = j.at("witness"); !w.is_null()) {
      c.witness = Witness{w.at("x").get<double>(),        w.at("y").get<double>(),
                          real_from_json(w.at("bound")),   w.at("conclusive").get<bool>(),
                          w.at("symmetric").get<bool>(),  w.at("weight").get<double>()};
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("certificate: ") + e.what());
  }
}

nlohmann::json to_json(const AuxiliaryConstants& c) {
  return {{"l", opt_to_json(c.l)}, {"valid_l", c.valid_l}, {"k", real_to_json(c.k)},
          {"L", real_to_json(c.L)}, {"xi", real_to_json(c.xi)}};
}

AuxiliaryConstants constants_from_json(const nlohmann::json& j) {
  try {
    return {opt_from_json(j.at("l")), j.at("valid_l").get<bool>(), real_from_json(j.at("k")),
            real_from_json(j.at("L")), real_from_json(j.at("xi"))};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("constants: ") + e.what());
  }
}

}  // namespace setfix
