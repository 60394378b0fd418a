#pragma once

// Brute-force reference computations used by the unit and acceptance tests.
// Nothing here shares code paths with the library beyond IntervalUnion
// construction and pointwise operator evaluation.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "setfix/interval_set.hpp"
#include "setfix/operator.hpp"

namespace oracle {

using setfix::Interval;
using setfix::IntervalUnion;

/// Sample points of `s` on a grid of step h inside each part, endpoints included.
inline std::vector<double> sample(const IntervalUnion& s, double h) {
  std::vector<double> pts;
  for (const auto& p : s.parts()) {
    const auto m = static_cast<std::size_t>(std::ceil(p.width() / h));
    for (std::size_t i = 0; i <= m; ++i) pts.push_back(std::min(p.hi, p.lo + double(i) * h));
  }
  std::sort(pts.begin(), pts.end());
  return pts;
}

inline double dist_sorted(double x, const std::vector<double>& b) {
  auto it = std::lower_bound(b.begin(), b.end(), x);
  double d = std::numeric_limits<double>::infinity();
  if (it != b.end()) d = *it - x;
  if (it != b.begin()) d = std::min(d, x - *std::prev(it));
  return d;
}

struct Functionals {
  double gap;
  double excess_ab;
  double excess_ba;
  double hausdorff;
};

/// Discretize both sets at step h and take min / max-min over the samples.
inline Functionals grid_functionals(const IntervalUnion& a, const IntervalUnion& b, double h) {
  const auto pa = sample(a, h);
  const auto pb = sample(b, h);
  Functionals f{std::numeric_limits<double>::infinity(), 0.0, 0.0, 0.0};
  for (double x : pa) {
    const double d = dist_sorted(x, pb);
    f.gap = std::min(f.gap, d);
    f.excess_ab = std::max(f.excess_ab, d);
  }
  for (double y : pb) f.excess_ba = std::max(f.excess_ba, dist_sorted(y, pa));
  f.hausdorff = std::max(f.excess_ab, f.excess_ba);
  return f;
}

/// Up to `max_parts` random parts in [-1, 1]; about one part in five is a point.
inline IntervalUnion random_union(std::mt19937_64& rng, int max_parts = 4) {
  std::uniform_int_distribution<int> count(1, max_parts);
  std::uniform_real_distribution<double> pos(-1.0, 1.0);
  std::uniform_real_distribution<double> width(0.0, 0.6);
  std::bernoulli_distribution degenerate(0.2);
  std::vector<Interval> raw;
  const int k = count(rng);
  for (int i = 0; i < k; ++i) {
    const double lo = pos(rng);
    const double w = degenerate(rng) ? 0.0 : width(rng);
    raw.push_back(Interval::make(lo, lo + w));
  }
  return IntervalUnion(raw);
}

/// Union of T(y) over `n` evenly spaced samples of each part of Y.
inline std::vector<IntervalUnion> sampled_images(const setfix::MultivaluedOperator& t, const IntervalUnion& y,
                                                 std::size_t n) {
  std::vector<IntervalUnion> out;
  for (const auto& p : y.parts()) {
    for (std::size_t i = 0; i < n; ++i) {
      const double s = n == 1 ? p.lo : p.lo + (p.hi - p.lo) * double(i) / double(n - 1);
      out.push_back(t.eval(std::clamp(s, p.lo, p.hi)));
    }
  }
  return out;
}

/// T^n(x) = [-x^(2^n), x^(2^n)] for T(x) = [-x^2, x^2], by repeated squaring.
inline double square_iterate(double x0, int n) {
  double v = std::abs(x0);
  for (int i = 0; i < n; ++i) v *= v;
  return v;
}

/// Direct evaluation of sum_{j<=n} k^(n-j) b_j.
inline double toeplitz_direct(double k, const std::vector<double>& b, std::size_t n) {
  double s = 0.0;
  for (std::size_t j = 0; j <= n; ++j) s += std::pow(k, double(n - j)) * b[j];
  return s;
}

/// sup H(T(x),{x*}) / H(TG(x),{x*}) on a uniform grid, skipping tiny denominators.
inline double grid_sup_ratio(const setfix::MultivaluedOperator& t, const setfix::MultivaluedOperator& tg,
                             double xstar, std::size_t n) {
  const auto& d = t.domain();
  const IntervalUnion star = IntervalUnion::point(xstar);
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = d.lo() + (d.hi() - d.lo()) * double(i) / double(n - 1);
    const double num = setfix::hausdorff(t.eval(x), star);
    const double den = setfix::hausdorff(tg.eval(x), star);
    if (den < 1e-14) continue;
    best = std::max(best, num / den);
  }
  return best;
}

/// T(x) = [-x^2/4, x^2/4] on [-1/2, 1/2]; with a Takahashi weight of 1/4 it
/// has a Ciric-feasible perturbation and l < 1, so the decay check is live.
inline setfix::MultivaluedOperator quarter_square() {
  using setfix::Term;
  const auto d = setfix::Domain::make(-0.5, 0.5);
  const setfix::BoundaryFn lower = Term::power(-0.25, 2);
  const setfix::BoundaryFn upper = Term::power(0.25, 2);
  return setfix::MultivaluedOperator(d, {{{-0.5, 0.0}, lower, upper}, {{0.0, 0.5}, lower, upper}}, "quarter_square");
}

}  // namespace oracle
