// setfix: command-line front end for scenario runs.
//
//   setfix run scenarios/sqrt_takahashi_34.json --out report.json
//   setfix certify --operator sqrt_example --lambda 0.75
//   setfix iterate --operator square_example --x0 0.5 --format csv
//   setfix stability --operator sqrt_example --lambda 0.75
//
// Exit status: 0 when no stability verdict fails, 1 when one does, 2 on errors.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "setfix/error.hpp"
#include "setfix/scenario.hpp"

namespace {

struct Shared {
  std::optional<std::size_t> grid;
  std::optional<double> tol;
  std::string out;
  std::string format = "json";
  bool timing = false;
};

struct Adhoc {
  std::string op = "sqrt_example";
  std::optional<double> lambda;
  std::vector<double> g;  // wx, wy, shift
  std::vector<std::string> variants;
  std::vector<double> x0;
  std::optional<std::size_t> max_n;
};

void add_shared(CLI::App* app, Shared& s) {
  app->add_option("--grid", s.grid, "grid points per axis")->check(CLI::Range(std::size_t{2}, std::size_t{1'000'000}));
  app->add_option("--tol", s.tol, "orbit convergence tolerance")->check(CLI::PositiveNumber);
  app->add_option("--out", s.out, "write the report here instead of stdout");
  app->add_option("--format", s.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app->add_flag("--timing", s.timing, "include per-phase timings in JSON output");
}

void add_adhoc(CLI::App* app, Adhoc& a) {
  app->add_option("--operator", a.op, "built-in name or operator JSON file");
  auto* lam = app->add_option("--lambda", a.lambda, "Takahashi weight in (0,1)");
  app->add_option("--g", a.g, "linear perturbation wx,wy,shift")->expected(3)->delimiter(',')->excludes(lam);
}

nlohmann::json operator_spec(const std::string& op) {
  if (!std::filesystem::exists(op)) return op;
  std::ifstream in(op);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw setfix::Error(setfix::ErrorCode::SchemaError, op + ": " + e.what());
  }
  return j;
}

nlohmann::json adhoc_scenario(const Adhoc& a, const std::string& analysis) {
  nlohmann::json j{{"name", analysis}, {"operator", operator_spec(a.op)}, {"analyses", {analysis}}};
  if (a.lambda) j["perturbation"] = {{"kind", "takahashi"}, {"lambda", *a.lambda}};
  if (a.g.size() == 3) j["perturbation"] = {{"kind", "linear"}, {"wx", a.g[0]}, {"wy", a.g[1]}, {"shift", a.g[2]}};
  if (!a.variants.empty()) j["variants"] = a.variants;
  if (!a.x0.empty()) j["x0_list"] = a.x0;
  if (a.max_n) j["max_n"] = *a.max_n;
  return j;
}

void apply_shared(setfix::Scenario& s, const Shared& sh) {
  if (sh.grid) s.grid_n = *sh.grid;
  if (sh.tol) s.tol = *sh.tol;
}

int finish(const setfix::RunReport& rep, const Shared& sh, const std::optional<std::string>& scenario_out,
           const std::string& scenario_format) {
  std::string out = sh.out;
  std::string format = sh.format;
  if (out.empty() && scenario_out) {
    out = *scenario_out;
    format = scenario_format;
  }
  if (!out.empty()) {
    setfix::emit_report(rep, format, out, sh.timing);
  } else if (format == "json") {
    std::cout << setfix::to_json(rep, sh.timing).dump(2) << "\n";
  } else {
    std::cout << setfix::verdicts_to_csv(rep);
    for (const auto& o : rep.orbits) std::cout << "\n" << setfix::orbit_to_csv(o.trace);
  }
  return rep.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Set-valued fixed-point analysis: certification, orbits, stability checks"};
  app.require_subcommand(1);

  Shared sh;
  std::string scenario_path;
  auto* run = app.add_subcommand("run", "run a scenario file");
  run->add_option("scenario", scenario_path, "scenario JSON")->required()->check(CLI::ExistingFile);
  add_shared(run, sh);

  Adhoc adhoc;
  auto* cert = app.add_subcommand("certify", "contraction certificates and constants for T and T_G");
  add_adhoc(cert, adhoc);
  cert->add_option("--variant", adhoc.variants, "ciric, ciric_reich_rus, combined");
  add_shared(cert, sh);

  auto* iter = app.add_subcommand("iterate", "Picard orbits of T and T_G");
  add_adhoc(iter, adhoc);
  iter->add_option("--x0", adhoc.x0, "starting points");
  iter->add_option("--max-n", adhoc.max_n, "maximum number of steps");
  add_shared(iter, sh);

  auto* stab = app.add_subcommand("stability", "stability harnesses with certified constants");
  add_adhoc(stab, adhoc);
  add_shared(stab, sh);

  CLI11_PARSE(app, argc, argv);

  try {
    setfix::Scenario s;
    if (run->parsed()) {
      s = setfix::load_scenario(scenario_path);
    } else {
      const std::string analysis = cert->parsed() ? "certify" : iter->parsed() ? "iterate" : "stability";
      s = setfix::scenario_from_json(adhoc_scenario(adhoc, analysis));
    }
    apply_shared(s, sh);
    const auto rep = setfix::run_scenario(s);
    return finish(rep, sh, run->parsed() ? s.output_path : std::nullopt, s.output_format);
  } catch (const setfix::Error& e) {
    std::cerr << "setfix: " << e.what() << "\n";
    return 2;
  }
}
