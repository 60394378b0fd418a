#include "setfix/iteration.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "setfix/error.hpp"
#include "setfix/grid.hpp"
#include "setfix/json_util.hpp"

namespace setfix {

namespace {

constexpr double stall_ratio = 1.0 - 1e-6;
constexpr std::size_t stall_window = 100;

int sgn(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

OrbitTrace picard_orbit(const MultivaluedOperator& t, double x0, const OrbitOptions& opts) {
  if (opts.max_n < 1) throw Error(ErrorCode::ParameterRange, "max_n must be >= 1");
  if (!(opts.tol > 0.0)) throw Error(ErrorCode::ParameterRange, "orbit tolerance must be positive");
  if (!t.domain().contains(x0)) {
    throw Error(ErrorCode::OutOfDomain, "x0 = " + std::to_string(x0) + " outside the domain of " + t.name());
  }

  OrbitTrace tr;
  tr.x0 = x0;
  tr.target = opts.target;
  std::optional<IntervalUnion> tgt;
  if (opts.target) tgt = IntervalUnion::point(*opts.target);

  auto push = [&](std::size_t n, IntervalUnion s, double h_prev) {
    OrbitStep st{n, std::move(s), h_prev, std::nullopt};
    if (tgt) st.h_to_target = hausdorff(st.set, *tgt);
    tr.steps.push_back(std::move(st));
  };

  push(0, IntervalUnion::point(x0), 0.0);
  std::size_t slow = 0;
  for (std::size_t n = 1; n <= opts.max_n; ++n) {
    const IntervalUnion& prev = tr.steps.back().set;
    IntervalUnion next = [&] {
      try {
        return t.set_image(prev);
      } catch (const Error& e) {
        throw Error(e.code(), "orbit step " + std::to_string(n) + ": " + e.what());
      }
    }();
    const double h = hausdorff(prev, next);
    const double h_before = tr.steps.back().h_to_prev;
    push(n, std::move(next), h);
    if (h < opts.tol) {
      tr.converged = true;
      break;
    }
    slow = (n > 1 && h >= stall_ratio * h_before) ? slow + 1 : 0;
    if (slow >= stall_window) {
      tr.stalled = true;
      break;
    }
  }
  if (tr.converged) {
    const Interval hull = tr.steps.back().set.hull();
    if (hull.width() < 1e-6) tr.limit_estimate = 0.5 * (hull.lo + hull.hi);
  }
  return tr;
}

FixedPointScan scan_fixed_points(const PointwiseOperator& t, std::size_t grid_n, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorCode::ParameterRange, "scan tolerance must be positive");
  const auto xs = uniform_grid(t.domain().bounds, grid_n);
  auto residual = [&](double x) { return x - nearest_point(x, t.eval(x)); };

  std::vector<double> r(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) { r[i] = residual(xs[i]); });

  // (point, |residual|)
  std::vector<std::pair<double, double>> cand;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (std::abs(r[i]) < tol) cand.emplace_back(xs[i], std::abs(r[i]));
  }
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    if (sgn(r[i]) == 0 || sgn(r[i + 1]) == 0 || sgn(r[i]) == sgn(r[i + 1])) continue;
    double a = xs[i];
    double b = xs[i + 1];
    double ra = r[i];
    double rb = r[i + 1];
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (a + b);
      if (m <= a || m >= b) break;
      const double rm = residual(m);
      if (rm == 0.0) {
        a = b = m;
        ra = rb = 0.0;
        break;
      }
      if (sgn(rm) == sgn(ra)) {
        a = m;
        ra = rm;
      } else {
        b = m;
        rb = rm;
      }
    }
    const auto best = std::abs(ra) <= std::abs(rb) ? std::pair{a, std::abs(ra)} : std::pair{b, std::abs(rb)};
    if (best.second < tol) cand.push_back(best);
  }
  std::sort(cand.begin(), cand.end());

  FixedPointScan scan;
  scan.tol = tol;
  scan.grid_n = grid_n;
  for (std::size_t i = 0; i < cand.size();) {
    std::size_t j = i;
    auto keep = cand[i];
    while (j + 1 < cand.size() && cand[j + 1].first - cand[j].first < tol) {
      ++j;
      if (cand[j].second < keep.second) keep = cand[j];
    }
    scan.fixed.push_back(keep.first);
    i = j + 1;
  }
  for (double p : scan.fixed) {
    if (hausdorff(t.eval(p), IntervalUnion::point(p)) < tol) scan.strict.push_back(p);
  }
  return scan;
}

double orbit_rate(const OrbitTrace& trace) {
  std::size_t usable = 0;
  double rate = 0.0;
  bool have_ratio = false;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& h = trace.steps[i].h_to_target;
    if (!h || !(*h > 0.0)) continue;
    ++usable;
    if (i > 0) {
      const auto& hp = trace.steps[i - 1].h_to_target;
      if (hp && *hp > 0.0) {
        rate = have_ratio ? std::max(rate, *h / *hp) : *h / *hp;
        have_ratio = true;
      }
    }
  }
  if (usable < 3 || !have_ratio) {
    throw Error(ErrorCode::InsufficientData,
                "orbit has " + std::to_string(usable) + " steps with positive distance to the target (need 3)");
  }
  return rate;
}

std::string orbit_to_csv(const OrbitTrace& trace) {
  std::size_t width = 0;
  for (const auto& st : trace.steps) width = std::max(width, st.set.size());
  std::ostringstream os;
  os.precision(17);
  os << "n";
  for (std::size_t i = 0; i < width; ++i) os << ",part_" << i << "_lo,part_" << i << "_hi";
  os << ",h_to_prev,h_to_target\n";
  for (const auto& st : trace.steps) {
    os << st.n;
    const auto parts = st.set.parts();
    for (std::size_t i = 0; i < width; ++i) {
      if (i < parts.size()) {
        os << ',' << parts[i].lo << ',' << parts[i].hi;
      } else {
        os << ",,";
      }
    }
    os << ',' << st.h_to_prev << ',';
    if (st.h_to_target) os << *st.h_to_target;
    os << '\n';
  }
  return os.str();
}

nlohmann::json to_json(const OrbitTrace& trace) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& st : trace.steps) {
    steps.push_back({{"n", st.n},
                     {"set", to_json(st.set)},
                     {"h_to_prev", real_to_json(st.h_to_prev)},
                     {"h_to_target", opt_to_json(st.h_to_target)}});
  }
  return {{"x0", trace.x0},
          {"target", opt_to_json(trace.target)},
          {"converged", trace.converged},
          {"stalled", trace.stalled},
          {"limit_estimate", opt_to_json(trace.limit_estimate)},
          {"steps", std::move(steps)}};
}

OrbitTrace orbit_from_json(const nlohmann::json& j) {
  try {
    OrbitTrace tr;
    tr.x0 = j.at("x0").get<double>();
    tr.target = opt_from_json(j.at("target"));
    tr.converged = j.at("converged").get<bool>();
    tr.stalled = j.at("stalled").get<bool>();
    tr.limit_estimate = opt_from_json(j.at("limit_estimate"));
    for (const auto& sj : j.at("steps")) {
      tr.steps.push_back({sj.at("n").get<std::size_t>(), interval_union_from_json(sj.at("set")),
                          real_from_json(sj.at("h_to_prev")), opt_from_json(sj.at("h_to_target"))});
    }
    return tr;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("orbit: ") + e.what());
  }
}

nlohmann::json to_json(const FixedPointScan& scan) {
  return {{"fixed", scan.fixed}, {"strict", scan.strict}, {"tol", scan.tol}, {"grid_n", scan.grid_n}};
}

FixedPointScan scan_from_json(const nlohmann::json& j) {
  try {
    return {j.at("fixed").get<std::vector<double>>(), j.at("strict").get<std::vector<double>>(),
            j.at("tol").get<double>(), j.at("grid_n").get<std::size_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("fixed-point scan: ") + e.what());
  }
}

}  // namespace setfix
