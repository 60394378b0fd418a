#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "setfix/error.hpp"
#include "setfix/iteration.hpp"

using namespace setfix;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected setfix::Error");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("square example orbit follows repeated squaring") {
  const auto t = builtin::square_example();
  for (double x0 : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8}) {
    OrbitOptions o;
    o.target = 0.0;
    const auto tr = picard_orbit(t, x0, o);
    CHECK(tr.converged);
    CHECK(tr.steps.front().set == IntervalUnion::point(x0));
    for (std::size_t n = 1; n < tr.steps.size(); ++n) {
      const double v = oracle::square_iterate(x0, int(n));
      const auto& s = tr.steps[n].set;
      INFO("x0 = " << x0 << ", n = " << n);
      CHECK(std::abs(s.hi() - v) <= 1e-12);
      CHECK(std::abs(s.lo() + v) <= 1e-12);
      CHECK(*tr.steps[n].h_to_target == doctest::Approx(v));
    }
    REQUIRE(tr.limit_estimate);
    CHECK(std::abs(*tr.limit_estimate) <= 1e-9);
  }
}

TEST_CASE("two-step orbit of the square example by hand") {
  const auto tr = picard_orbit(builtin::square_example(), 0.5, {.max_n = 2, .tol = 1e-10, .target = 0.0});
  REQUIRE(tr.steps.size() == 3);
  CHECK(tr.steps[1].set == IntervalUnion::of(-0.25, 0.25));
  CHECK(tr.steps[2].set == IntervalUnion::of(-0.0625, 0.0625));
  CHECK(tr.steps[1].h_to_prev == doctest::Approx(0.75));
  CHECK_FALSE(tr.converged);
}

TEST_CASE("orbit rate is the worst consecutive contraction of h_to_target") {
  OrbitOptions o;
  o.target = 0.0;
  const auto tr = picard_orbit(builtin::square_example(), 0.5, o);
  // h_n = 0.5^(2^n): ratios 1/2, 1/4, 1/16, ...
  CHECK(orbit_rate(tr) == doctest::Approx(0.5));
  const auto short_tr = picard_orbit(builtin::square_example(), 0.5, {.max_n = 1, .tol = 1e-10, .target = 0.0});
  CHECK(code_of([&] { (void)orbit_rate(short_tr); }) == ErrorCode::InsufficientData);
  const auto no_target = picard_orbit(builtin::square_example(), 0.5);
  CHECK(code_of([&] { (void)orbit_rate(no_target); }) == ErrorCode::InsufficientData);
}

TEST_CASE("sqrt example orbits converge to 1") {
  const auto t = builtin::sqrt_example();
  for (double x0 : {0.25, 2.0, 4.0}) {
    const auto tr = picard_orbit(t, x0, {.max_n = 10000, .tol = 1e-10, .target = 1.0});
    CHECK(tr.converged);
    REQUIRE(tr.limit_estimate);
    CHECK(*tr.limit_estimate == doctest::Approx(1.0).epsilon(1e-8));
  }
  // T(4) = [1,2], T([1,2]) = [1, sqrt 2], ...: the upper end is 4^(2^-n)
  const auto tr = picard_orbit(t, 4.0, {.max_n = 5, .tol = 1e-10, .target = 1.0});
  for (std::size_t n = 1; n < tr.steps.size(); ++n) {
    CHECK(tr.steps[n].set.lo() == 1.0);
    CHECK(tr.steps[n].set.hi() == doctest::Approx(std::pow(4.0, std::pow(0.5, double(n)))));
  }
}

TEST_CASE("orbit argument validation") {
  const auto t = builtin::sqrt_example();
  CHECK(code_of([&] { (void)picard_orbit(t, 0.1); }) == ErrorCode::OutOfDomain);
  CHECK(code_of([&] { (void)picard_orbit(t, 1.0, {.max_n = 0}); }) == ErrorCode::ParameterRange);
  CHECK(code_of([&] { (void)picard_orbit(t, 1.0, {.max_n = 5, .tol = 0.0}); }) == ErrorCode::ParameterRange);
}

TEST_CASE("fixed point scans of the built-ins") {
  const auto sq = scan_fixed_points(builtin::square_example(), 10001);
  REQUIRE(sq.fixed.size() == 1);
  REQUIRE(sq.strict.size() == 1);
  CHECK(std::abs(sq.fixed[0]) <= 1e-9);
  CHECK(std::abs(sq.strict[0]) <= 1e-9);
  const auto sr = scan_fixed_points(builtin::sqrt_example(), 10001);
  REQUIRE(sr.strict.size() == 1);
  CHECK(sr.strict[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(sr.fixed == sr.strict);
}

TEST_CASE("fixed point scan finds non-strict fixed points") {
  // T(x) = [0, 1] on [0,1]: every x is fixed, none strict
  const auto d = Domain::make(0.0, 1.0);
  const MultivaluedOperator all(d, {{{0.0, 1.0}, Term::constant(0.0), Term::constant(1.0)}});
  const auto s = scan_fixed_points(all, 11);
  CHECK(s.fixed.size() == 11);
  CHECK(s.strict.empty());
  // T(x) = {1 - x}: a single strict point at 1/2 found by bisection off-grid
  const MultivaluedOperator flip(d, {{{0.0, 1.0}, Term::affine(-1.0, 1.0), Term::affine(-1.0, 1.0)}});
  const auto f = scan_fixed_points(flip, 10);
  REQUIRE(f.strict.size() == 1);
  CHECK(f.strict[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("fixed and strict fixed point sets are unchanged by admissible perturbations") {
  constexpr std::size_t n = 10001;
  for (const auto& t : {builtin::square_example(), builtin::sqrt_example()}) {
    const double step = t.domain().width() / double(n - 1);
    const auto base = scan_fixed_points(t, n);
    for (double lam : {0.5, 0.75}) {
      const auto pert = scan_fixed_points(perturb(t, PerturbationSpec::takahashi(lam)), n);
      INFO(t.name() << " lambda " << lam);
      REQUIRE(pert.fixed.size() == base.fixed.size());
      REQUIRE(pert.strict.size() == base.strict.size());
      for (std::size_t i = 0; i < base.fixed.size(); ++i) CHECK(std::abs(pert.fixed[i] - base.fixed[i]) <= step);
      for (std::size_t i = 0; i < base.strict.size(); ++i) CHECK(std::abs(pert.strict[i] - base.strict[i]) <= step);
    }
  }
}

TEST_CASE("orbit CSV and JSON") {
  const auto tr = picard_orbit(builtin::square_example(), 0.5, {.max_n = 3, .tol = 1e-10, .target = 0.0});
  const auto csv = orbit_to_csv(tr);
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "n,part_0_lo,part_0_hi,h_to_prev,h_to_target");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 4);

  const auto back = orbit_from_json(to_json(tr));
  CHECK(to_json(back) == to_json(tr));
  CHECK(back.steps.size() == tr.steps.size());
  CHECK(back.steps[2].set == tr.steps[2].set);

  const auto scan = scan_fixed_points(builtin::sqrt_example(), 101);
  const auto sback = scan_from_json(to_json(scan));
  CHECK(sback.strict == scan.strict);
  CHECK(sback.grid_n == scan.grid_n);
}
