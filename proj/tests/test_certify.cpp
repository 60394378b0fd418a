#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "setfix/certify.hpp"
#include "setfix/error.hpp"

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

const MultivaluedOperator& sqrt_t() {
  static const auto t = builtin::sqrt_example();
  return t;
}

const MultivaluedOperator& sqrt_tg() {
  static const auto tg = perturb(sqrt_t(), PerturbationSpec::takahashi(0.75));
  return tg;
}

}  // namespace

TEST_CASE("pair constraint coefficients by variant") {
  // x = 1/4, y = 1: T(x) = [1,2], T(y) = {1}
  const auto ci = pair_constraint(sqrt_t(), Variant::Ciric, 0.25, 1.0);
  CHECK(ci.a == 0.75);
  CHECK(ci.h == 1.0);
  CHECK(ci.b == 0.75);  // D(x, T(y))
  CHECK(ci.c == 0.0);   // D(y, T(x))
  const auto crr = pair_constraint(sqrt_t(), Variant::CiricReichRus, 0.25, 1.0);
  CHECK(crr.b == 0.75);  // D(x, T(x))
  CHECK(crr.c == 0.0);   // D(y, T(y))
  const auto co = pair_constraint(sqrt_t(), Variant::Combined, 0.25, 1.0);
  CHECK(co.b == 0.75);
  CHECK(co.c == 0.75);
}

TEST_CASE("sqrt example is not Ciric: witness at (1/4, 1)") {
  const auto c = certify_contraction(sqrt_t(), Variant::Ciric);
  CHECK_FALSE(c.feasible);
  CHECK_FALSE(c.params);
  REQUIRE(c.witness);
  CHECK(c.witness->conclusive);
  CHECK(std::abs(c.witness->x - 0.25) <= 1e-3);
  CHECK(std::abs(c.witness->y - 1.0) <= 1e-3);
  CHECK(c.witness->bound >= 4.0 / 3.0 - 1e-12);
  CHECK(c.pairs == 501 * 500);
}

TEST_CASE("Takahashi 3/4 perturbation of the sqrt example is Ciric") {
  const auto c = certify_contraction(sqrt_tg(), Variant::Ciric);
  REQUIRE(c.feasible);
  REQUIRE(c.params);
  CHECK(c.margin >= 0.0);
  CHECK(c.params->admissible());
  // regression values from the first certified run
  CHECK(c.params->alpha == doctest::Approx(0.875).epsilon(1e-12));
  CHECK(c.params->beta == 0.0);
  CHECK(c.params->gamma == 0.0);
  CHECK(c.margin == doctest::Approx(1.7512514410011892e-06).epsilon(1e-6));
  CHECK_FALSE(c.witness);
  CHECK_FALSE(c.sampled);
}

TEST_CASE("certified parameters hold on 10^4 random off-grid pairs") {
  std::mt19937_64 rng(42);
  const auto t2 = oracle::quarter_square();
  const auto tg2 = perturb(t2, PerturbationSpec::takahashi(0.25));
  for (const auto* op : {&sqrt_tg(), &tg2}) {
    for (Variant v : {Variant::Ciric, Variant::CiricReichRus, Variant::Combined}) {
      const auto c = certify_contraction(*op, v);
      REQUIRE(c.feasible);
      const auto& p = *c.params;
      std::uniform_real_distribution<double> pos(op->domain().lo(), op->domain().hi());
      double worst = -1.0;
      for (int i = 0; i < 10000; ++i) {
        const auto pc = pair_constraint(*op, v, pos(rng), pos(rng));
        worst = std::max(worst, pc.h - (p.alpha * pc.a + p.beta * pc.b + p.gamma * pc.c));
      }
      INFO(op->name() << " " << to_string(v));
      CHECK(worst <= 1e-9);
    }
  }
}

TEST_CASE("square example is not Ciric with or without Takahashi perturbation") {
  const auto t = builtin::square_example();
  for (double lam : {0.5, 0.75}) {
    const auto c = certify_contraction(perturb(t, PerturbationSpec::takahashi(lam)), Variant::Ciric);
    CHECK_FALSE(c.feasible);
    REQUIRE(c.witness);
    CHECK(c.witness->bound > 1.0);
  }
  CHECK_FALSE(certify_contraction(t, Variant::Ciric).feasible);
}

TEST_CASE("margin requirement and option validation") {
  CertifyOptions strict;
  strict.margin_req = 1.0;
  CHECK_FALSE(certify_contraction(sqrt_tg(), Variant::Ciric, strict).feasible);
  CertifyOptions bad;
  bad.margin_req = -1.0;
  CHECK(code_of([&] { (void)certify_contraction(sqrt_tg(), Variant::Ciric, bad); }) == ErrorCode::ParameterRange);
  bad = {};
  bad.initial_step = 0.0;
  CHECK(code_of([&] { (void)certify_contraction(sqrt_tg(), Variant::Ciric, bad); }) == ErrorCode::ParameterRange);
}

TEST_CASE("region maxima over the admissible simplex") {
  const double top = 1.0 - simplex_margin;
  CHECK(region_max(Variant::Ciric, 1.0, 2.0, 3.0) == doctest::Approx(3.0 * top));
  CHECK(region_max(Variant::CiricReichRus, 1.0, 2.0, 3.0) == doctest::Approx(top + 3.0));
  CHECK(region_max(Variant::Combined, 1.0, 0.1, 0.0) == doctest::Approx(top));
  CHECK(region_max(Variant::Combined, 0.0, 4.0, 0.0) == doctest::Approx(2.0 * top));
  CHECK(ContractionParams{0.3, 0.3, 0.3, Variant::Ciric}.admissible());
  CHECK_FALSE(ContractionParams{0.4, 0.3, 0.3, Variant::Ciric}.admissible());
  CHECK(ContractionParams{0.5, 0.2, 0.9, Variant::CiricReichRus}.admissible());
  CHECK_FALSE(ContractionParams{0.5, 0.3, 0.0, Variant::Combined}.admissible());
}

TEST_CASE("constant k = (alpha+beta)/(1-gamma)") {
  const auto k = corollary_k({0.2, 0.1, 0.4, Variant::Ciric});
  CHECK(k.value == doctest::Approx(0.5));
  CHECK(k.in_unit);
  CHECK(corollary_k({0.875, 0.0, 0.0, Variant::Ciric}).value == 0.875);
  CHECK(code_of([] { (void)corollary_k({0.0, 0.0, 1.0, Variant::CiricReichRus}); }) == ErrorCode::ParameterRange);
  // the bound H(TG(x), {x*}) <= k |x - x*| holds pointwise with the certified params
  const auto c = certify_contraction(sqrt_tg(), Variant::Ciric);
  const double kk = corollary_k(*c.params).value;
  for (double x = 0.25; x <= 4.0; x += 0.01) {
    CHECK(hausdorff(sqrt_tg().eval(x), IntervalUnion::point(1.0)) <= kk * std::abs(x - 1.0) + 1e-12);
  }
}

TEST_CASE("displacement constant equals 1 - lambda for Takahashi perturbations") {
  for (double lam : {0.5, 0.75}) {
    for (const auto& t : {builtin::square_example(), builtin::sqrt_example()}) {
      const auto tg = perturb(t, PerturbationSpec::takahashi(lam));
      const auto L = displacement_constant_L(t, tg, 501);
      INFO(t.name() << " lambda " << lam);
      CHECK(std::abs(L.value - (1.0 - lam)) <= 1e-12);
      CHECK(L.skipped == 1);  // the fixed point itself
    }
  }
}

TEST_CASE("sup ratio l against the grid oracle and closed forms") {
  const auto sq = builtin::square_example();
  const auto sq_half = perturb(sq, PerturbationSpec::takahashi(0.5));
  const auto l_sq = sup_ratio_l(sq, sq_half, 0.0, 501);
  // ratio 2x/(1+x), largest at the domain end x = 8/9
  CHECK(std::abs(l_sq.value - 16.0 / 17.0) <= 1e-9);
  CHECK(l_sq.value == doctest::Approx(oracle::grid_sup_ratio(sq, sq_half, 0.0, 501)));

  const auto l_sr = sup_ratio_l(sqrt_t(), sqrt_tg(), 1.0, 501);
  CHECK(l_sr.value == doctest::Approx(16.0 / 9.0).epsilon(1e-12));
  REQUIRE(l_sr.argmax);
  CHECK(*l_sr.argmax == 0.25);
  // T(x) always contains 1, so the gap form vanishes
  CHECK(sup_ratio_l(sqrt_t(), sqrt_tg(), 1.0, 501, RatioKind::Gap).value == 0.0);

  CHECK(code_of([&] { (void)sup_ratio_l(sqrt_t(), sqrt_tg(), 2.0, 101); }) == ErrorCode::StrictFixedPointMismatch);
}

TEST_CASE("retraction-displacement check") {
  const ContractionParams p{0.875, 0.0, 0.0, Variant::Ciric};
  const auto r = retraction_displacement_check(sqrt_t(), p, 0.25, 1.0, 501);
  CHECK(r.holds);
  CHECK(r.xi_max > 0.99);
  CHECK(r.xi_max < 1.0);
  CHECK(r.skipped == 1);
  CHECK(code_of([&] { (void)retraction_displacement_check(sqrt_t(), p, 0.0, 1.0, 11); }) ==
        ErrorCode::ParameterRange);
}

TEST_CASE("certificate and constants JSON round trip") {
  for (const auto* op : {&sqrt_t(), &sqrt_tg()}) {
    const auto c = certify_contraction(*op, Variant::Ciric);
    const auto back = certificate_from_json(to_json(c));
    CHECK(to_json(back) == to_json(c));
    CHECK(back.feasible == c.feasible);
    CHECK(back.params == c.params);
  }
  AuxiliaryConstants k{16.0 / 9.0, false, 0.875, 0.25, 0.5};
  const auto kb = constants_from_json(to_json(k));
  CHECK(kb.l == k.l);
  CHECK(kb.valid_l == k.valid_l);
  CHECK(kb.L == k.L);
  CHECK(variant_from_string("crr") == Variant::CiricReichRus);
  CHECK(code_of([] { (void)variant_from_string("banach"); }) == ErrorCode::SchemaError);
}
