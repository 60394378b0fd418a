// Acceptance checks: one PASS/FAIL line per criterion, detail lines indented.
// Exit status is the number of failing criteria (capped at 1).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "setfix/certify.hpp"
#include "setfix/grid.hpp"
#include "setfix/iteration.hpp"
#include "setfix/scenario.hpp"
#include "setfix/stability.hpp"

using namespace setfix;

namespace {

const std::filesystem::path scenario_dir{SETFIX_SCENARIO_DIR};

template <typename... A>
void detail(const char* fmt, A... a) {
  std::printf("      ");
  std::printf(fmt, a...);
  std::printf("\n");
}

// 1 ----------------------------------------------------------------------
bool metric_oracle() {
  std::mt19937_64 rng(1);
  constexpr double h = 1e-3;
  double worst_dev = 0.0;
  double worst_axiom = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto a = oracle::random_union(rng);
    const auto b = oracle::random_union(rng);
    const auto c = oracle::random_union(rng);
    const auto ref = oracle::grid_functionals(a, b, h);
    worst_dev = std::max({worst_dev, std::abs(gap(a, b) - ref.gap), std::abs(excess(a, b) - ref.excess_ab),
                          std::abs(excess(b, a) - ref.excess_ba), std::abs(hausdorff(a, b) - ref.hausdorff)});
    const double ab = hausdorff(a, b);
    worst_axiom = std::max({worst_axiom, hausdorff(a, a), std::abs(ab - hausdorff(b, a)),
                            hausdorff(a, c) - ab - hausdorff(b, c), -ab});
  }
  detail("max |exact - grid oracle| = %.3e (limit %.0e)", worst_dev, 2 * h);
  detail("max axiom violation = %.3e (limit 1e-12)", worst_axiom);
  return worst_dev <= 2 * h && worst_axiom <= 1e-12;
}

// 2 ----------------------------------------------------------------------
bool square_closed_form() {
  const auto t = builtin::square_example();
  double worst_stated = 0.0;
  double worst_squaring = 0.0;
  int first_bad_n = -1;
  for (double x0 : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8}) {
    const auto tr = picard_orbit(t, x0, {.max_n = 10, .tol = 1e-300, .target = 0.0});
    for (std::size_t n = 1; n < tr.steps.size(); ++n) {
      const auto& s = tr.steps[n].set;
      const double stated = std::pow(x0, 2.0 * double(n));
      const double dev = std::max(std::abs(s.hi() - stated), std::abs(s.lo() + stated));
      if (dev > 1e-12 && (first_bad_n < 0 || int(n) < first_bad_n)) first_bad_n = int(n);
      worst_stated = std::max(worst_stated, dev);
      const double sq = oracle::square_iterate(x0, int(n));
      worst_squaring = std::max({worst_squaring, std::abs(s.hi() - sq), std::abs(s.lo() + sq)});
    }
  }
  const auto fix = scan_fixed_points(t, 10001);
  const bool fix_ok = fix.fixed.size() == 1 && fix.strict.size() == 1 && std::abs(fix.fixed[0]) <= 1e-9 &&
                      std::abs(fix.strict[0]) <= 1e-9;
  detail("endpoints vs +-x0^(2n): max deviation %.3e (limit 1e-12), first failing n = %d", worst_stated, first_bad_n);
  detail("info: endpoints vs +-x0^(2^n): max deviation %.3e", worst_squaring);
  detail("Fix = SFix = {0}: %s", fix_ok ? "yes" : "no");
  return worst_stated <= 1e-12 && fix_ok;
}

// 3 ----------------------------------------------------------------------
bool sqrt_witness() {
  const auto t = builtin::sqrt_example();
  const auto tg = perturb(t, PerturbationSpec::takahashi(0.75));
  const auto ct = certify_contraction(t, Variant::Ciric);
  bool ok = !ct.feasible && ct.witness && std::abs(ct.witness->x - 0.25) <= 1e-3 &&
            std::abs(ct.witness->y - 1.0) <= 1e-3 && ct.witness->bound >= 4.0 / 3.0 - 1e-12;
  if (ct.witness) {
    detail("T: feasible=%d witness (%.6f, %.6f) alpha+beta >= %.12f", ct.feasible, ct.witness->x, ct.witness->y,
           ct.witness->bound);
  }
  const auto cg = certify_contraction(tg, Variant::Ciric);
  ok = ok && cg.feasible && cg.margin >= 0.0;
  if (cg.params) {
    detail("T_G: feasible=%d alpha=%.6f beta=%.6f gamma=%.6f margin=%.3e", cg.feasible, cg.params->alpha,
           cg.params->beta, cg.params->gamma, cg.margin);
    // regression values pinned from the first successful run
    const bool pinned = std::abs(cg.params->alpha - 0.875) <= 1e-12 && cg.params->beta == 0.0 &&
                        cg.params->gamma == 0.0;
    detail("pinned (0.875, 0, 0): %s", pinned ? "match" : "MISMATCH");
    ok = ok && pinned;
  }
  return ok;
}

// 4 ----------------------------------------------------------------------
bool displacement_exact() {
  bool ok = true;
  for (const auto& t : {builtin::square_example(), builtin::sqrt_example()}) {
    for (double lam : {0.5, 0.75}) {
      const auto L = displacement_constant_L(t, perturb(t, PerturbationSpec::takahashi(lam)), 501);
      const double dev = std::abs(L.value - (1.0 - lam));
      detail("%s lambda=%.2f: L=%.15f |L-(1-lambda)|=%.2e", t.name().c_str(), lam, L.value, dev);
      ok = ok && dev <= 1e-12;
    }
  }
  return ok;
}

// 5 ----------------------------------------------------------------------
bool fixed_sets_equal() {
  bool ok = true;
  constexpr std::size_t n = 10001;
  for (const auto& t : {builtin::square_example(), builtin::sqrt_example()}) {
    const double step = t.domain().width() / double(n - 1);
    const auto a = scan_fixed_points(t, n);
    for (double lam : {0.5, 0.75}) {
      const auto b = scan_fixed_points(perturb(t, PerturbationSpec::takahashi(lam)), n);
      bool same = a.fixed.size() == b.fixed.size() && a.strict.size() == b.strict.size();
      for (std::size_t i = 0; same && i < a.fixed.size(); ++i) same = std::abs(a.fixed[i] - b.fixed[i]) <= step;
      for (std::size_t i = 0; same && i < a.strict.size(); ++i) same = std::abs(a.strict[i] - b.strict[i]) <= step;
      detail("%s lambda=%.2f: |Fix|=%zu |SFix|=%zu %s", t.name().c_str(), lam, b.fixed.size(), b.strict.size(),
             same ? "identical" : "DIFFERENT");
      ok = ok && same;
    }
  }
  return ok;
}

// 6 ----------------------------------------------------------------------
bool geometric_decay() {
  struct Case {
    MultivaluedOperator t;
    double lam;
  };
  const std::vector<Case> cases{{builtin::square_example(), 0.5}, {builtin::square_example(), 0.75},
                                {builtin::sqrt_example(), 0.5},   {builtin::sqrt_example(), 0.75},
                                {oracle::quarter_square(), 0.25}};
  bool ok = true;
  int live = 0;
  for (const auto& c : cases) {
    const auto tg = perturb(c.t, PerturbationSpec::takahashi(c.lam));
    const auto scan = scan_fixed_points(tg, 10001);
    if (scan.strict.size() != 1) continue;
    const double xs = scan.strict[0];
    const double l = sup_ratio_l(c.t, tg, xs, 501).value;
    const auto cert = certify_contraction(tg, Variant::Ciric);
    if (!(l < 1.0) || !cert.feasible) {
      detail("%s lambda=%.2f: l=%.6f feasible=%d (premise not met, skipped)", c.t.name().c_str(), c.lam, l,
             cert.feasible);
      continue;
    }
    ++live;
    const double k = corollary_k(*cert.params).value;
    std::vector<double> x0s;
    for (double x : uniform_grid(c.t.domain().bounds, 9)) x0s.push_back(x);
    const auto d = geometric_decay_check(c.t, l, k, xs, x0s, 30);
    detail("%s lambda=%.2f: l=%.6f k=%.6f lk=%.6f checked=%zu worst excess=%.3e %s", c.t.name().c_str(), c.lam, l, k,
           l * k, d.checked, d.worst_excess, d.holds ? "holds" : "FAILS");
    ok = ok && d.holds;
  }
  const auto sq = builtin::square_example();
  const double l_half = sup_ratio_l(sq, perturb(sq, PerturbationSpec::takahashi(0.5)), 0.0, 501).value;
  detail("square lambda=0.5: l=%.15f, 16/17=%.15f", l_half, 16.0 / 17.0);
  return ok && live > 0 && std::abs(l_half - 16.0 / 17.0) <= 1e-9;
}

// 7 ----------------------------------------------------------------------
bool ulam_hyers() {
  const auto t = builtin::sqrt_example();
  const auto tg = perturb(t, PerturbationSpec::takahashi(0.75));
  const auto cert = certify_contraction(tg, Variant::Ciric);
  if (!cert.feasible) return false;
  const double L = displacement_constant_L(t, tg, 501).value;
  const auto r = ulam_hyers_verify(t, tg, *cert.params, L, 1.0);
  bool enough = true;
  for (const auto& [key, v] : r.metrics) {
    if (key.rfind("samples_eps_", 0) == 0) enough = enough && v >= 50;
  }
  detail("c=%.12f samples=%zu worst ratio=%.9f", r.constant, r.samples, r.worst_ratio);
  return r.holds && enough && r.samples >= 150;
}

// 8 ----------------------------------------------------------------------
bool well_posed_ostrowski() {
  const auto t = builtin::sqrt_example();
  const auto tg = perturb(t, PerturbationSpec::takahashi(0.75));
  const auto cert = certify_contraction(tg, Variant::Ciric);
  if (!cert.feasible) return false;
  const double L = displacement_constant_L(t, tg, 501).value;
  const auto wp = well_posedness_verify(t, *cert.params, L, 1.0, {0.1, 0.8}, 60, 1e-4);
  detail("well-posedness: final |u_60 - x*|=%.3e bound ratio=%.9f %s", wp.metrics.at("final_distance"),
         wp.metrics.at("bound_worst_ratio"), wp.holds ? "holds" : "FAILS");
  const auto os = ostrowski_verify(t, tg, *cert.params, L, 1.0, t.domain().hi());
  const double weighted = os.metrics.at("weighted_bound_worst_ratio");
  detail("Ostrowski: final |v_60 - x*|=%.3e residual ratio=%.9f", os.metrics.at("final_distance"),
         os.metrics.at("residual_worst_ratio"));
  detail("Ostrowski weighted bound L(1+gamma)/(1-gamma) CT(k, D(v_j+1,T(v_j)), n), k=%.6f: worst ratio %.6f %s",
         os.metrics.at("k_derived"), weighted, weighted <= 1.0 + 1e-9 ? "holds" : "FAILS");
  detail("info: bound with initial term (1+gamma)/(1-gamma) CT(k, D(v_j+1,T_G(v_j)), n) + k^(n+1)|v0-x*|: ratio %.6f",
         os.metrics.at("recursive_bound_worst_ratio"));
  detail("info: k with (1-alpha) in the denominator would be %.6f", os.metrics.at("k_printed"));
  return wp.holds && os.holds && weighted <= 1.0 + 1e-9;
}

// 9 ----------------------------------------------------------------------
bool cauchy_toeplitz() {
  std::vector<double> b(301);
  for (std::size_t j = 0; j < b.size(); ++j) b[j] = std::pow(0.9, double(j));
  double worst = 0.0;
  for (std::size_t n = 0; n <= 50; ++n) {
    const double closed = (std::pow(0.9, double(n + 1)) - std::pow(0.5, double(n + 1))) / 0.4;
    worst = std::max(worst, std::abs(cauchy_toeplitz_sum(0.5, b, n) - closed));
  }
  const double c300 = cauchy_toeplitz_sum(0.5, b, 300);
  detail("max |c_n - closed form| (n<=50) = %.3e; c_300 = %.3e", worst, c300);
  return worst <= 1e-12 && c300 < 1e-12;
}

// 10 ---------------------------------------------------------------------
bool determinism() {
  bool ok = true;
  for (const char* name : {"square_takahashi_half.json", "sqrt_takahashi_34.json"}) {
    const auto a = to_json(run_scenario(scenario_dir / name)).dump(2);
    const auto b = to_json(run_scenario(scenario_dir / name)).dump(2);
    detail("%s: %zu bytes, %s", name, a.size(), a == b ? "identical" : "DIFFERENT");
    ok = ok && a == b;
  }
  return ok;
}

void claimed_ranges() {
  const auto sq = builtin::square_example();
  const double l_sq = sup_ratio_l(sq, perturb(sq, PerturbationSpec::takahashi(0.5)), 0.0, 501).value;
  const bool in_sq = l_sq > 2.0 / 3.0 && l_sq < 1.0;
  std::printf("INFO  claimed l in (2/3, 1), square lambda=1/2: measured %.12f -> %s\n", l_sq,
              in_sq ? "agrees" : "disagrees");
  for (double lam : {0.5, 0.75}) {
    const auto t = builtin::sqrt_example();
    const double l = sup_ratio_l(t, perturb(t, PerturbationSpec::takahashi(lam)), 1.0, 501).value;
    const bool in = l > 1.0 / (2.0 * lam) && l < 1.0;
    std::printf("INFO  claimed l in (1/(2 lambda), 1), sqrt lambda=%.2f: measured %.12f -> %s\n", lam, l,
                in ? "agrees" : "disagrees");
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<bool()>>> criteria{
      {"metric functionals vs grid oracle, Hausdorff axioms", metric_oracle},
      {"square example closed form and Fix = SFix = {0}", square_closed_form},
      {"sqrt example witness (1/4, 1); T_G Ciric-feasible at lambda=3/4", sqrt_witness},
      {"displacement constant L = 1 - lambda", displacement_exact},
      {"Fix/SFix of T and T_G coincide", fixed_sets_equal},
      {"geometric decay with rate l*k; l = 16/17", geometric_decay},
      {"Ulam-Hyers with certified constants", ulam_hyers},
      {"well-posedness and Ostrowski bounds", well_posed_ostrowski},
      {"Cauchy-Toeplitz closed form", cauchy_toeplitz},
      {"deterministic scenario reports", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    std::string err;
    try {
      ok = criteria[i].second();
    } catch (const std::exception& e) {
      err = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!err.empty()) detail("error: %s", err.c_str());
    std::printf("%s  %2zu. %s (%.2f s)\n", ok ? "PASS" : "FAIL", i + 1, criteria[i].first, secs);
    std::fflush(stdout);
    failed += ok ? 0 : 1;
  }
  claimed_ranges();
  std::printf("%d of %zu criteria pass\n", int(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
