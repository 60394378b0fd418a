#pragma once

// Picard orbits S_{n+1} = T(S_n) of sets and grid location of fixed and
// strict fixed points.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "setfix/interval_set.hpp"
#include "setfix/operator.hpp"

namespace setfix {

struct OrbitStep {
  std::size_t n = 0;
  IntervalUnion set = IntervalUnion::point(0.0);
  double h_to_prev = 0.0;  // 0 for the starting step
  std::optional<double> h_to_target;
};

struct OrbitTrace {
  double x0 = 0.0;
  std::optional<double> target;
  std::vector<OrbitStep> steps;
  bool converged = false;
  /// Successive contraction ratio stayed >= 1 - 1e-6 for too long.
  bool stalled = false;
  /// Midpoint of the final iterate, when it converged to a near-singleton.
  std::optional<double> limit_estimate;
};

struct OrbitOptions {
  std::size_t max_n = 10'000;
  double tol = 1e-10;
  std::optional<double> target;
};

/// Iterates until hausdorff(S_n, S_{n+1}) < tol or max_n steps. An iterate
/// leaving the domain raises OutOfDomain naming the step.
OrbitTrace picard_orbit(const MultivaluedOperator& t, double x0, const OrbitOptions& opts = {});

struct FixedPointScan {
  std::vector<double> fixed;
  std::vector<double> strict;
  double tol = 0.0;
  std::size_t grid_n = 0;
};

/// Grid scan of r(x) = x - nearest_point(x, T(x)) with bisection on sign
/// changes. Points closer than tol are merged.
FixedPointScan scan_fixed_points(const PointwiseOperator& t, std::size_t grid_n, double tol = 1e-9);

/// max_n h_to_target(n+1) / h_to_target(n) over consecutive steps with
/// positive distances; InsufficientData with fewer than 3 such steps.
double orbit_rate(const OrbitTrace& trace);

/// Columns n, part_0_lo, part_0_hi, ..., h_to_prev, h_to_target.
std::string orbit_to_csv(const OrbitTrace& trace);

nlohmann::json to_json(const OrbitTrace& trace);
OrbitTrace orbit_from_json(const nlohmann::json& j);

nlohmann::json to_json(const FixedPointScan& scan);
FixedPointScan scan_from_json(const nlohmann::json& j);

}  // namespace setfix
