#pragma once

// Scenario files: which operator and perturbation to analyse, which analyses
// to run (certify -> iterate -> stability), and the reports they produce.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "setfix/certify.hpp"
#include "setfix/iteration.hpp"
#include "setfix/operator.hpp"
#include "setfix/stability.hpp"

namespace setfix {

struct StabilityOptions {
  UlamHyersOptions ulam_hyers;
  DecaySequence well_posed_seq{0.1, 0.8};
  std::size_t well_posed_n_max = 60;
  double well_posed_tol = 1e-4;
  OstrowskiOptions ostrowski;
  std::optional<double> ostrowski_x0;  // default: domain.hi
  double shift = 0.01;                 // translation used to build F
  std::optional<ComparisonFunction> psi;
  std::optional<double> psi_c;         // default: the measured L
};

struct Scenario {
  std::string name = "scenario";
  nlohmann::json operator_spec;
  nlohmann::json perturbation_spec = {{"kind", "linear"}, {"wx", 0.0}, {"wy", 1.0}, {"shift", 0.0}};
  std::vector<std::string> analyses;
  std::vector<Variant> variants{Variant::Ciric};
  std::size_t grid_n = 501;
  std::size_t scan_grid_n = 10'001;
  double tol = 1e-10;
  std::size_t max_n = 10'000;
  std::vector<double> x0_list;
  StabilityOptions stability;
  std::optional<std::string> output_path;
  std::string output_format = "json";
};

/// Parses and validates; SchemaError names the offending field.
Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario(const std::filesystem::path& path);
nlohmann::json to_json(const Scenario& s);

struct LabeledCertificate {
  std::string target;  // "T" or "TG"
  ContractionCertificate cert;
};

struct LabeledOrbit {
  std::string target;
  OrbitTrace trace;
  std::optional<double> rate;
};

struct RunReport {
  nlohmann::json scenario_echo;
  std::vector<std::string> analyses;
  std::string operator_name;
  std::string perturbation;
  std::optional<double> x_star;
  FixedPointScan fix_t;
  FixedPointScan fix_tg;
  // certify
  std::vector<LabeledCertificate> certificates;
  AuxiliaryConstants constants;
  std::map<std::string, double> constant_details;
  // iterate
  std::vector<LabeledOrbit> orbits;
  std::optional<DecayCheck> decay;
  // stability
  std::vector<StabilityReport> stability;
  std::map<std::string, double> timing_ms;

  bool requested(const std::string& analysis) const;
  /// No stability verdict fails (not-applicable counts as success).
  bool ok() const;
};

RunReport run_scenario(const Scenario& s);
RunReport run_scenario(const std::filesystem::path& path);

nlohmann::json to_json(const RunReport& r, bool include_timing = false);
RunReport run_report_from_json(const nlohmann::json& j);

/// One row per stability verdict.
std::string verdicts_to_csv(const RunReport& r);

/// Writes the report. JSON goes to `path`; CSV writes the verdict rows to
/// `path` and one `<stem>.orbit_<i>.csv` per orbit next to it (a header-only
/// file when there are no orbits). Throws IoError.
void emit_report(const RunReport& r, const std::string& format, const std::filesystem::path& path,
                 bool include_timing = false);

}  // namespace setfix
