#include "setfix/interval_set.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <sstream>

#include "setfix/error.hpp"

namespace setfix {

namespace {

std::string describe(double lo, double hi) {
  std::ostringstream os;
  os.precision(17);
  os << "[" << lo << ", " << hi << "]";
  return os.str();
}

}  // namespace

Interval Interval::make(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
    throw Error(ErrorCode::InvalidInterval, "bad interval " + describe(lo, hi));
  }
  return Interval{lo, hi};
}

Domain Domain::make(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    throw Error(ErrorCode::DegenerateDomain, "domain " + describe(lo, hi) + " must satisfy lo < hi");
  }
  return Domain{Interval{lo, hi}};
}

IntervalUnion normalize(std::span<const Interval> raw) {
  if (raw.empty()) throw Error(ErrorCode::EmptySet, "cannot normalize an empty list of intervals");
  std::vector<Interval> sorted;
  sorted.reserve(raw.size());
  for (const auto& iv : raw) sorted.push_back(Interval::make(iv.lo, iv.hi));
  std::sort(sorted.begin(), sorted.end(), [](const Interval& a, const Interval& b) {
    return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
  });

  IntervalUnion out;
  out.parts_.reserve(sorted.size());
  out.parts_.push_back(sorted.front());
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    Interval& back = out.parts_.back();
    if (sorted[i].lo - back.hi <= IntervalUnion::merge_eps) {
      back.hi = std::max(back.hi, sorted[i].hi);
    } else {
      out.parts_.push_back(sorted[i]);
    }
  }
  return out;
}

IntervalUnion::IntervalUnion(std::span<const Interval> raw) : IntervalUnion(normalize(raw)) {}

IntervalUnion::IntervalUnion(std::initializer_list<Interval> raw)
    : IntervalUnion(std::span<const Interval>(raw.begin(), raw.size())) {}

IntervalUnion IntervalUnion::point(double x) {
  const Interval p = Interval::point(x);
  return IntervalUnion(std::span<const Interval>(&p, 1));
}

IntervalUnion IntervalUnion::of(double lo, double hi) {
  const Interval p = Interval::make(lo, hi);
  return IntervalUnion(std::span<const Interval>(&p, 1));
}

IntervalUnion IntervalUnion::with_ambient(const Interval& ambient) const {
  for (const auto& p : parts_) {
    if (!ambient.contains(p)) {
      throw Error(ErrorCode::OutOfDomain,
                  "part " + describe(p.lo, p.hi) + " escapes ambient " + describe(ambient.lo, ambient.hi));
    }
  }
  IntervalUnion copy = *this;
  copy.ambient_ = ambient;
  return copy;
}

bool IntervalUnion::contains(double x) const noexcept { return dist_point_to_set(x, *this) == 0.0; }

double dist_point_to_set(double x, const IntervalUnion& a) {
  const auto parts = a.parts();
  // first part whose right end is >= x
  auto it = std::lower_bound(parts.begin(), parts.end(), x,
                             [](const Interval& iv, double v) { return iv.hi < v; });
  double best = std::numeric_limits<double>::infinity();
  if (it != parts.end()) {
    if (it->lo <= x) return 0.0;
    best = it->lo - x;
  }
  if (it != parts.begin()) best = std::min(best, x - std::prev(it)->hi);
  return best;
}

double nearest_point(double x, const IntervalUnion& a) {
  const auto parts = a.parts();
  auto it = std::lower_bound(parts.begin(), parts.end(), x,
                             [](const Interval& iv, double v) { return iv.hi < v; });
  if (it != parts.end() && it->lo <= x) return x;
  if (it == parts.end()) return parts.back().hi;
  if (it == parts.begin()) return it->lo;
  const double below = std::prev(it)->hi;
  return (x - below <= it->lo - x) ? below : it->lo;
}

double gap(const IntervalUnion& a, const IntervalUnion& b) {
  const auto pa = a.parts();
  const auto pb = b.parts();
  double best = std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < pa.size() && j < pb.size()) {
    const double d = std::max({0.0, pa[i].lo - pb[j].hi, pb[j].lo - pa[i].hi});
    best = std::min(best, d);
    if (best == 0.0) return 0.0;
    if (pa[i].hi < pb[j].hi) {
      ++i;
    } else {
      ++j;
    }
  }
  return best;
}

double excess(const IntervalUnion& a, const IntervalUnion& b) {
  double best = 0.0;
  for (const auto& p : a.parts()) {
    best = std::max({best, dist_point_to_set(p.lo, b), dist_point_to_set(p.hi, b)});
  }
  const auto pb = b.parts();
  for (std::size_t j = 0; j + 1 < pb.size(); ++j) {
    const double mid = 0.5 * (pb[j].hi + pb[j + 1].lo);
    if (a.contains(mid)) best = std::max(best, std::min(mid - pb[j].hi, pb[j + 1].lo - mid));
  }
  return best;
}

double hausdorff(const IntervalUnion& a, const IntervalUnion& b) {
  return std::max(excess(a, b), excess(b, a));
}

IntervalUnion affine_combine(double x, const IntervalUnion& s, double lam) {
  if (!(lam >= 0.0 && lam <= 1.0)) {
    throw Error(ErrorCode::ParameterRange, "affine weight " + std::to_string(lam) + " outside [0,1]");
  }
  const double mu = 1.0 - lam;
  std::vector<Interval> mapped;
  mapped.reserve(s.size());
  for (const auto& p : s.parts()) mapped.push_back({lam * x + mu * p.lo, lam * x + mu * p.hi});
  return IntervalUnion(mapped);
}

IntervalUnion union_all(std::span<const IntervalUnion> sets) {
  if (sets.empty()) throw Error(ErrorCode::EmptySet, "union of an empty family");
  std::vector<Interval> all;
  for (const auto& s : sets) all.insert(all.end(), s.parts().begin(), s.parts().end());
  return IntervalUnion(all);
}

nlohmann::json to_json(const IntervalUnion& s) {
  nlohmann::json parts = nlohmann::json::array();
  for (const auto& p : s.parts()) parts.push_back({p.lo, p.hi});
  nlohmann::json j{{"parts", std::move(parts)}};
  if (s.ambient()) j["ambient"] = {s.ambient()->lo, s.ambient()->hi};
  return j;
}

namespace {

Interval interval_from_pair(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw Error(ErrorCode::SchemaError, "interval must be [lo, hi], got " + j.dump());
  }
  return Interval::make(j[0].get<double>(), j[1].get<double>());
}

}  // namespace

IntervalUnion interval_union_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("parts") || !j["parts"].is_array()) {
    throw Error(ErrorCode::SchemaError, "interval union must be {\"parts\": [[lo,hi],...]}");
  }
  std::vector<Interval> raw;
  for (const auto& p : j["parts"]) raw.push_back(interval_from_pair(p));
  IntervalUnion s(raw);
  if (j.contains("ambient")) s = s.with_ambient(interval_from_pair(j["ambient"]));
  return s;
}

}  // namespace setfix
