#pragma once

// Compact subsets of the real line stored as finite unions of closed
// intervals, with the gap / excess / Pompeiu-Hausdorff functionals evaluated
// exactly on that representation.

#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"

namespace setfix {

/// Closed interval [lo, hi] with finite endpoints; lo == hi is a point.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  /// Validating factory: throws InvalidInterval on lo > hi or non-finite input.
  static Interval make(double lo, double hi);
  static Interval point(double x) { return make(x, x); }

  double width() const noexcept { return hi - lo; }
  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  bool contains(const Interval& other) const noexcept {
    return lo <= other.lo && other.hi <= hi;
  }

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// The ambient space X: a nondegenerate compact interval with d(x,y) = |x-y|.
struct Domain {
  Interval bounds;

  /// Throws DegenerateDomain unless lo < hi.
  static Domain make(double lo, double hi);

  double lo() const noexcept { return bounds.lo; }
  double hi() const noexcept { return bounds.hi; }
  double width() const noexcept { return bounds.hi - bounds.lo; }
  bool contains(double x) const noexcept { return bounds.contains(x); }

  friend bool operator==(const Domain&, const Domain&) = default;
};

/// Nonempty compact set as a strictly sorted list of disjoint closed
/// intervals. Neighbouring parts are separated by more than merge_eps.
///
/// Equality compares the point sets only; the optional ambient interval is
/// metadata checked at construction.
class IntervalUnion {
 public:
  static constexpr double merge_eps = 1e-12;

  /// Normalizes `raw` (sort + merge); throws EmptySet on empty input.
  explicit IntervalUnion(std::span<const Interval> raw);
  IntervalUnion(std::initializer_list<Interval> raw);

  static IntervalUnion point(double x);
  static IntervalUnion of(double lo, double hi);

  /// Returns a copy tagged with an ambient interval; throws OutOfDomain when
  /// a part is not contained in it.
  IntervalUnion with_ambient(const Interval& ambient) const;

  std::span<const Interval> parts() const noexcept { return parts_; }
  const std::optional<Interval>& ambient() const noexcept { return ambient_; }
  std::size_t size() const noexcept { return parts_.size(); }

  double lo() const noexcept { return parts_.front().lo; }
  double hi() const noexcept { return parts_.back().hi; }
  Interval hull() const noexcept { return {lo(), hi()}; }
  bool is_point() const noexcept { return parts_.size() == 1 && parts_[0].lo == parts_[0].hi; }
  bool contains(double x) const noexcept;

  friend bool operator==(const IntervalUnion& a, const IntervalUnion& b) noexcept {
    return a.parts_ == b.parts_;
  }

 private:
  IntervalUnion() = default;
  friend IntervalUnion normalize(std::span<const Interval> raw);

  std::vector<Interval> parts_;
  std::optional<Interval> ambient_;
};

IntervalUnion normalize(std::span<const Interval> raw);

/// inf_{a in A} |x - a|; zero iff x is in A.
double dist_point_to_set(double x, const IntervalUnion& a);

/// The point of A closest to x. A tie (x at the middle of a gap) resolves to
/// the lower candidate.
double nearest_point(double x, const IntervalUnion& a);

/// Gap functional D(A,B) = inf |a - b|.
double gap(const IntervalUnion& a, const IntervalUnion& b);

/// Excess e(A,B) = sup_{a in A} D(a,B).
///
/// dist_point_to_set(., B) is piecewise linear and its local maxima over A
/// sit either at endpoints of A's parts or at middles of B's gaps, so the
/// supremum is a maximum over that finite candidate set.
double excess(const IntervalUnion& a, const IntervalUnion& b);

/// Pompeiu-Hausdorff distance max(e(A,B), e(B,A)).
double hausdorff(const IntervalUnion& a, const IntervalUnion& b);

/// {lam*x + (1-lam)*s : s in S}; throws ParameterRange unless lam in [0,1].
IntervalUnion affine_combine(double x, const IntervalUnion& s, double lam);

/// Normalized union; throws EmptySet on an empty sequence.
IntervalUnion union_all(std::span<const IntervalUnion> sets);

// JSON form: {"parts": [[lo,hi], ...]}; parsing re-normalizes.
nlohmann::json to_json(const IntervalUnion& s);
IntervalUnion interval_union_from_json(const nlohmann::json& j);

}  // namespace setfix
