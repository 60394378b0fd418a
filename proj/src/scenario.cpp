#include "setfix/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

#include "setfix/error.hpp"
#include "setfix/json_util.hpp"

namespace setfix {

namespace {

const std::vector<std::string> kAnalyses{"certify", "iterate", "stability"};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j[key].get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::SchemaError, where + "." + key + " has the wrong type: " + j[key].dump());
  }
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw Error(ErrorCode::SchemaError, "unknown field '" + where + "." + k + "'");
  }
}

StabilityOptions stability_options_from_json(const nlohmann::json& j) {
  StabilityOptions o;
  if (!j.is_object()) throw Error(ErrorCode::SchemaError, "stability_options must be an object");
  reject_unknown(j, {"ulam_hyers", "well_posed", "ostrowski", "shift", "psi", "psi_c"}, "stability_options");
  if (j.contains("ulam_hyers")) {
    const auto& u = j["ulam_hyers"];
    o.ulam_hyers.eps_list = get_or(u, "eps_list", o.ulam_hyers.eps_list, "ulam_hyers");
    o.ulam_hyers.samples_per_eps = get_or(u, "samples_per_eps", o.ulam_hyers.samples_per_eps, "ulam_hyers");
    o.ulam_hyers.grid_n = get_or(u, "grid_n", o.ulam_hyers.grid_n, "ulam_hyers");
    for (double e : o.ulam_hyers.eps_list) {
      if (!(e > 0.0)) throw Error(ErrorCode::SchemaError, "ulam_hyers.eps_list entries must be positive");
    }
  }
  if (j.contains("well_posed")) {
    const auto& w = j["well_posed"];
    o.well_posed_seq = decay_from_json(w);
    o.well_posed_n_max = get_or(w, "n_max", o.well_posed_n_max, "well_posed");
    o.well_posed_tol = get_or(w, "conv_tol", o.well_posed_tol, "well_posed");
  }
  if (j.contains("ostrowski")) {
    const auto& w = j["ostrowski"];
    o.ostrowski.delta = decay_from_json(w);
    o.ostrowski.n_max = get_or(w, "n_max", o.ostrowski.n_max, "ostrowski");
    o.ostrowski.conv_tol = get_or(w, "conv_tol", o.ostrowski.conv_tol, "ostrowski");
    if (w.contains("x0")) o.ostrowski_x0 = get_or(w, "x0", 0.0, "ostrowski");
  }
  o.shift = get_or(j, "shift", o.shift, "stability_options");
  if (j.contains("psi")) o.psi = comparison_from_json(j["psi"]);
  if (j.contains("psi_c")) o.psi_c = get_or(j, "psi_c", 0.0, "stability_options");
  return o;
}

nlohmann::json to_json(const StabilityOptions& o) {
  nlohmann::json j{
      {"ulam_hyers",
       {{"eps_list", o.ulam_hyers.eps_list}, {"samples_per_eps", o.ulam_hyers.samples_per_eps},
        {"grid_n", o.ulam_hyers.grid_n}}},
      {"well_posed",
       {{"initial", o.well_posed_seq.initial}, {"ratio", o.well_posed_seq.ratio}, {"n_max", o.well_posed_n_max},
        {"conv_tol", o.well_posed_tol}}},
      {"ostrowski",
       {{"initial", o.ostrowski.delta.initial}, {"ratio", o.ostrowski.delta.ratio}, {"n_max", o.ostrowski.n_max},
        {"conv_tol", o.ostrowski.conv_tol}}},
      {"shift", o.shift}};
  if (o.ostrowski_x0) j["ostrowski"]["x0"] = *o.ostrowski_x0;
  if (o.psi) j["psi"] = to_json(*o.psi);
  if (o.psi_c) j["psi_c"] = *o.psi_c;
  return j;
}

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Runs a harness; violated premises become not-applicable reports.
template <typename F>
StabilityReport guarded(StabilityProperty p, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::HypothesisFailed:
      case ErrorCode::NoStrictFixedPoint:
      case ErrorCode::StrictFixedPointMismatch:
      case ErrorCode::ParameterRange:
      case ErrorCode::NoApproximateSolutions:
        return not_applicable(p, e.what());
      default:
        throw;
    }
  }
}

nlohmann::json to_json(const DecayCheck& d) {
  return {{"holds", d.holds}, {"factor", real_to_json(d.factor)}, {"worst_excess", real_to_json(d.worst_excess)},
          {"checked", d.checked}};
}

DecayCheck decay_check_from_json(const nlohmann::json& j) {
  return {j.at("holds").get<bool>(), real_from_json(j.at("factor")), real_from_json(j.at("worst_excess")),
          j.at("checked").get<std::size_t>()};
}

nlohmann::json real_map(const std::map<std::string, double>& m) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : m) j[k] = real_to_json(v);
  return j;
}

std::map<std::string, double> real_map_from(const nlohmann::json& j) {
  std::map<std::string, double> m;
  for (const auto& [k, v] : j.items()) m[k] = real_from_json(v);
  return m;
}

}  // namespace

Scenario scenario_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::SchemaError, "scenario must be a JSON object");
  reject_unknown(j,
                 {"name", "operator", "perturbation", "analyses", "variants", "grid_n", "scan_grid_n", "tol", "max_n",
                  "x0_list", "stability_options", "output"},
                 "scenario");
  Scenario s;
  s.name = get_or(j, "name", s.name, "scenario");
  if (!j.contains("operator")) throw Error(ErrorCode::SchemaError, "scenario.operator is required");
  s.operator_spec = j["operator"];
  if (j.contains("perturbation")) s.perturbation_spec = j["perturbation"];
  s.analyses = get_or(j, "analyses", s.analyses, "scenario");
  if (s.analyses.empty()) throw Error(ErrorCode::SchemaError, "scenario.analyses must be nonempty");
  std::set<std::string> seen;
  for (const auto& a : s.analyses) {
    if (std::find(kAnalyses.begin(), kAnalyses.end(), a) == kAnalyses.end()) {
      throw Error(ErrorCode::SchemaError, "unknown analysis '" + a + "' (expected certify, iterate, stability)");
    }
    if (!seen.insert(a).second) throw Error(ErrorCode::SchemaError, "analysis '" + a + "' listed twice");
  }
  if (j.contains("variants")) {
    s.variants.clear();
    for (const auto& v : get_or(j, "variants", std::vector<std::string>{}, "scenario")) {
      s.variants.push_back(variant_from_string(v));
    }
    if (std::find(s.variants.begin(), s.variants.end(), Variant::Ciric) == s.variants.end()) {
      s.variants.insert(s.variants.begin(), Variant::Ciric);
    }
  }
  s.grid_n = get_or(j, "grid_n", s.grid_n, "scenario");
  s.scan_grid_n = get_or(j, "scan_grid_n", s.scan_grid_n, "scenario");
  s.tol = get_or(j, "tol", s.tol, "scenario");
  s.max_n = get_or(j, "max_n", s.max_n, "scenario");
  if (s.grid_n < 2 || s.scan_grid_n < 2) throw Error(ErrorCode::SchemaError, "grid sizes must be >= 2");
  if (!(s.tol > 0.0)) throw Error(ErrorCode::SchemaError, "scenario.tol must be positive");
  if (s.max_n < 1) throw Error(ErrorCode::SchemaError, "scenario.max_n must be >= 1");
  s.x0_list = get_or(j, "x0_list", s.x0_list, "scenario");
  if (j.contains("stability_options")) s.stability = stability_options_from_json(j["stability_options"]);
  if (j.contains("output")) {
    const auto& o = j["output"];
    if (o.contains("path")) s.output_path = get_or(o, "path", std::string{}, "output");
    s.output_format = get_or(o, "format", s.output_format, "output");
  }
  if (s.output_format != "json" && s.output_format != "csv") {
    throw Error(ErrorCode::SchemaError, "output.format must be json or csv");
  }

  // operator-dependent checks
  const MultivaluedOperator t = operator_from_json(s.operator_spec);
  perturbation_from_json(s.perturbation_spec);
  for (double x0 : s.x0_list) {
    if (!t.domain().contains(x0)) {
      throw Error(ErrorCode::SchemaError, "x0 = " + fmt(x0) + " lies outside the domain [" + fmt(t.domain().lo()) +
                                              ", " + fmt(t.domain().hi()) + "]");
    }
  }
  if (s.stability.ostrowski_x0 && !t.domain().contains(*s.stability.ostrowski_x0)) {
    throw Error(ErrorCode::SchemaError, "ostrowski.x0 = " + fmt(*s.stability.ostrowski_x0) + " lies outside the domain");
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open scenario " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, path.string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

nlohmann::json to_json(const Scenario& s) {
  std::vector<std::string> variants;
  for (auto v : s.variants) variants.emplace_back(to_string(v));
  nlohmann::json j{{"name", s.name},
                   {"operator", s.operator_spec},
                   {"perturbation", s.perturbation_spec},
                   {"analyses", s.analyses},
                   {"variants", variants},
                   {"grid_n", s.grid_n},
                   {"scan_grid_n", s.scan_grid_n},
                   {"tol", s.tol},
                   {"max_n", s.max_n},
                   {"x0_list", s.x0_list},
                   {"stability_options", to_json(s.stability)},
                   {"output", {{"format", s.output_format}}}};
  if (s.output_path) j["output"]["path"] = *s.output_path;
  return j;
}

bool RunReport::requested(const std::string& analysis) const {
  return std::find(analyses.begin(), analyses.end(), analysis) != analyses.end();
}

bool RunReport::ok() const {
  return std::none_of(stability.begin(), stability.end(), [](const StabilityReport& r) { return r.verdict == Verdict::Fails; });
}

RunReport run_scenario(const Scenario& s) {
  RunReport rep;
  rep.scenario_echo = to_json(s);
  rep.analyses = s.analyses;

  auto t0 = Clock::now();
  const MultivaluedOperator t = operator_from_json(s.operator_spec);
  const PerturbationSpec pert = perturbation_from_json(s.perturbation_spec);
  const MultivaluedOperator tg = perturb(t, pert);
  rep.operator_name = t.name();
  rep.perturbation = pert.describe();
  rep.fix_t = scan_fixed_points(t, s.scan_grid_n);
  rep.fix_tg = scan_fixed_points(tg, s.scan_grid_n);
  if (rep.fix_tg.strict.size() == 1) rep.x_star = rep.fix_tg.strict.front();
  rep.timing_ms["setup"] = ms_since(t0);

  // constants used by every later phase
  t0 = Clock::now();
  for (const char* target : {"T", "TG"}) {
    const MultivaluedOperator& op = std::string(target) == "T" ? t : tg;
    for (Variant v : s.variants) {
      CertifyOptions co;
      co.grid_n = s.grid_n;
      rep.certificates.push_back({target, certify_contraction(op, v, co)});
    }
  }
  std::optional<ContractionParams> params;
  for (const auto& lc : rep.certificates) {
    if (lc.target == "TG" && lc.cert.variant == Variant::Ciric && lc.cert.feasible) params = lc.cert.params;
  }
  const auto est_L = displacement_constant_L(t, tg, s.grid_n);
  rep.constants.L = est_L.value;
  rep.constant_details["L_samples"] = double(est_L.samples);
  rep.constant_details["L_skipped"] = double(est_L.skipped);
  if (est_L.argmax) rep.constant_details["L_argmax"] = *est_L.argmax;
  std::optional<double> l_weak;
  if (rep.x_star && hausdorff(t.eval(*rep.x_star), IntervalUnion::point(*rep.x_star)) >= strict_check_tol) {
    rep.x_star.reset();  // strict for T_G only; treat as no common strict point
  }
  if (rep.x_star) {
    const auto est_l = sup_ratio_l(t, tg, *rep.x_star, s.grid_n);
    rep.constants.l = est_l.value;
    rep.constants.valid_l = est_l.value < 1.0;
    rep.constant_details["l_samples"] = double(est_l.samples);
    rep.constant_details["l_skipped"] = double(est_l.skipped);
    if (est_l.argmax) rep.constant_details["l_argmax"] = *est_l.argmax;
    const auto est_w = sup_ratio_l(t, tg, *rep.x_star, s.grid_n, RatioKind::Gap);
    l_weak = est_w.value;
    rep.constant_details["l_weak"] = est_w.value;
  }
  std::optional<RetractionCheck> rc;
  if (params) {
    rep.constants.k = corollary_k(*params).value;
    rep.constant_details["k_printed"] = (params->alpha + params->beta) / (1.0 - params->alpha);
    if (rep.x_star && rep.constants.L > 0.0 && std::isfinite(rep.constants.L)) {
      rc = retraction_displacement_check(t, *params, rep.constants.L, *rep.x_star, s.grid_n);
      rep.constants.xi = rc->xi_max;
      rep.constant_details["xi_holds"] = rc->holds ? 1.0 : 0.0;
    }
  }
  rep.timing_ms["certify"] = ms_since(t0);

  if (rep.requested("iterate")) {
    t0 = Clock::now();
    std::vector<double> x0s = s.x0_list;
    if (x0s.empty()) x0s.push_back(t.domain().hi());
    for (double x0 : x0s) {
      for (const char* target : {"T", "TG"}) {
        const MultivaluedOperator& op = std::string(target) == "T" ? t : tg;
        OrbitOptions o;
        o.max_n = s.max_n;
        o.tol = s.tol;
        o.target = rep.x_star;
        LabeledOrbit lo{target, picard_orbit(op, x0, o), std::nullopt};
        try {
          lo.rate = orbit_rate(lo.trace);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::InsufficientData) throw;
        }
        rep.orbits.push_back(std::move(lo));
      }
    }
    if (params && rep.x_star && rep.constants.valid_l) {
      rep.decay = geometric_decay_check(t, *rep.constants.l, rep.constants.k, *rep.x_star, x0s);
    }
    rep.timing_ms["iterate"] = ms_since(t0);
  }

  if (rep.requested("stability")) {
    t0 = Clock::now();
    const auto& so = s.stability;
    auto need = [&](StabilityProperty p, auto&& f) {
      if (!rep.x_star) {
        rep.stability.push_back(not_applicable(p, "no unique strict fixed point"));
      } else if (!params) {
        rep.stability.push_back(not_applicable(p, "no feasible contraction certificate for T_G"));
      } else {
        rep.stability.push_back(guarded(p, f));
      }
    };
    const PointwiseOperator f = translated(t, so.shift);
    const double L = rep.constants.L;

    need(StabilityProperty::DataDependence, [&] {
      if (!rc || !rc->holds || !(rc->xi_max < 1.0)) {
        return not_applicable(StabilityProperty::DataDependence, "no admissible xi from the retraction check");
      }
      return data_dependence_verify(t, f, *params, L, rc->xi_max, s.grid_n);
    });

    if (!rep.x_star) {
      rep.stability.push_back(not_applicable(StabilityProperty::PsiMPDataDependence, "no unique strict fixed point"));
    } else {
      rep.stability.push_back(guarded(StabilityProperty::PsiMPDataDependence, [&] {
        std::optional<ComparisonFunction> psi = so.psi;
        if (!psi && params && rc && rc->holds) {
          psi = ComparisonFunction::linear((1.0 + params->gamma) / ((1.0 - params->alpha - params->beta) * rc->xi_max));
        }
        if (!psi) {
          return not_applicable(StabilityProperty::PsiMPDataDependence, "no comparison function available");
        }
        return psi_mp_data_dependence(t, f, tg, *psi, so.psi_c.value_or(L), *rep.x_star, s.grid_n);
      }));
    }

    need(StabilityProperty::UlamHyers,
         [&] { return ulam_hyers_verify(t, tg, *params, L, *rep.x_star, so.ulam_hyers); });
    need(StabilityProperty::WellPosed, [&] {
      return well_posedness_verify(t, *params, L, *rep.x_star, so.well_posed_seq, so.well_posed_n_max,
                                   so.well_posed_tol);
    });
    need(StabilityProperty::Ostrowski, [&] {
      return ostrowski_verify(t, tg, *params, L, *rep.x_star, so.ostrowski_x0.value_or(t.domain().hi()), so.ostrowski);
    });
    need(StabilityProperty::QuasiContraction, [&] {
      if (!rep.constants.valid_l) {
        auto r = not_applicable(StabilityProperty::QuasiContraction, "sup ratio l = " + fmt(*rep.constants.l) + " is not below 1");
        r.metrics["l"] = *rep.constants.l;
        return r;
      }
      return quasi_contraction_verify(t, *rep.constants.l, *params, *rep.x_star, s.grid_n, false);
    });
    need(StabilityProperty::WeakQuasiContraction, [&] {
      if (!(*l_weak < 1.0)) {
        return not_applicable(StabilityProperty::WeakQuasiContraction, "gap ratio l = " + fmt(*l_weak) + " is not below 1");
      }
      return quasi_contraction_verify(t, *l_weak, *params, *rep.x_star, s.grid_n, true);
    });
    rep.timing_ms["stability"] = ms_since(t0);
  }
  return rep;
}

RunReport run_scenario(const std::filesystem::path& path) { return run_scenario(load_scenario(path)); }

nlohmann::json to_json(const RunReport& r, bool include_timing) {
  nlohmann::json j{{"scenario", r.scenario_echo},
                   {"analyses", r.analyses},
                   {"operator", r.operator_name},
                   {"perturbation", r.perturbation},
                   {"x_star", opt_to_json(r.x_star)},
                   {"fixed_points", {{"T", to_json(r.fix_t)}, {"TG", to_json(r.fix_tg)}}},
                   {"ok", r.ok()}};
  if (r.requested("certify")) {
    nlohmann::json certs = nlohmann::json::array();
    for (const auto& lc : r.certificates) {
      auto c = to_json(lc.cert);
      c["target"] = lc.target;
      certs.push_back(std::move(c));
    }
    j["certify"] = {{"certificates", std::move(certs)},
                    {"constants", to_json(r.constants)},
                    {"details", real_map(r.constant_details)}};
  }
  if (r.requested("iterate")) {
    nlohmann::json orbits = nlohmann::json::array();
    for (const auto& lo : r.orbits) {
      orbits.push_back({{"target", lo.target}, {"rate", opt_to_json(lo.rate)}, {"trace", to_json(lo.trace)}});
    }
    j["iterate"] = {{"orbits", std::move(orbits)}, {"decay", r.decay ? to_json(*r.decay) : nlohmann::json(nullptr)}};
  }
  if (r.requested("stability")) {
    nlohmann::json st = nlohmann::json::array();
    for (const auto& rep : r.stability) st.push_back(to_json(rep));
    j["stability"] = std::move(st);
  }
  if (include_timing) j["timing_ms"] = real_map(r.timing_ms);
  return j;
}

RunReport run_report_from_json(const nlohmann::json& j) {
  try {
    RunReport r;
    r.scenario_echo = j.at("scenario");
    r.analyses = j.at("analyses").get<std::vector<std::string>>();
    r.operator_name = j.at("operator").get<std::string>();
    r.perturbation = j.at("perturbation").get<std::string>();
    r.x_star = opt_from_json(j.at("x_star"));
    r.fix_t = scan_from_json(j.at("fixed_points").at("T"));
    r.fix_tg = scan_from_json(j.at("fixed_points").at("TG"));
    if (j.contains("certify")) {
      const auto& c = j["certify"];
      for (const auto& cj : c.at("certificates")) {
        r.certificates.push_back({cj.at("target").get<std::string>(), certificate_from_json(cj)});
      }
      r.constants = constants_from_json(c.at("constants"));
      r.constant_details = real_map_from(c.at("details"));
    }
    if (j.contains("iterate")) {
      const auto& it = j["iterate"];
      for (const auto& oj : it.at("orbits")) {
        r.orbits.push_back({oj.at("target").get<std::string>(), orbit_from_json(oj.at("trace")),
                            opt_from_json(oj.at("rate"))});
      }
      if (!it.at("decay").is_null()) r.decay = decay_check_from_json(it["decay"]);
    }
    if (j.contains("stability")) {
      for (const auto& sj : j["stability"]) r.stability.push_back(stability_report_from_json(sj));
    }
    if (j.contains("timing_ms")) r.timing_ms = real_map_from(j["timing_ms"]);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("run report: ") + e.what());
  }
}

std::string verdicts_to_csv(const RunReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "property,verdict,holds,constant,samples,worst_ratio\n";
  for (const auto& s : r.stability) {
    os << to_string(s.property) << ',' << to_string(s.verdict) << ',' << (s.holds ? "true" : "false") << ','
       << s.constant << ',' << s.samples << ',' << s.worst_ratio << '\n';
  }
  return os.str();
}

namespace {

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + p.string());
  out << content;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + p.string());
}

}  // namespace

void emit_report(const RunReport& r, const std::string& format, const std::filesystem::path& path,
                 bool include_timing) {
  if (format == "json") {
    write_file(path, to_json(r, include_timing).dump(2) + "\n");
    return;
  }
  if (format != "csv") throw Error(ErrorCode::SchemaError, "unknown report format '" + format + "'");
  write_file(path, verdicts_to_csv(r));
  const auto dir = path.parent_path();
  const auto stem = path.stem().string();
  if (r.orbits.empty()) {
    write_file(dir / (stem + ".orbit_0.csv"), "n,h_to_prev,h_to_target\n");
    return;
  }
  for (std::size_t i = 0; i < r.orbits.size(); ++i) {
    write_file(dir / (stem + ".orbit_" + std::to_string(i) + ".csv"), orbit_to_csv(r.orbits[i].trace));
  }
}

}  // namespace setfix
