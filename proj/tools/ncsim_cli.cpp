// ncsim: command-line front end for the noncontextuality test simulator.
//
// Exit codes: 0 success, 1 usage error, 2 computation or validation error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ncsim/analysis.hpp"
#include "ncsim/error.hpp"
#include "ncsim/nchv.hpp"

namespace {

using namespace ncsim;
using analysis::Json;

constexpr int kUsageError = 1;
constexpr int kComputationError = 2;

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw ValidationError("failed writing '" + path + "'");
}

/// Writes to `path`, or to stdout when `path` is empty.
void emit(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
  } else {
    write_file(path, content);
  }
}

struct Options {
  std::string experiment = "exp1";
  double visibility = 1.0;
  double efficiency = 1.0;
  double background = 0.0;
  std::uint64_t trials = analysis::kDefaultTrials;
  std::uint64_t seed = analysis::kDefaultSeed;
  std::optional<double> phi_a;
  std::optional<double> phi_a_prime;
  double phi_b = 0.0;
  double phi_c = 0.0;
  std::string sweep = "0:2:101";
  std::string out;
  std::string counts;
  bool json = false;
};

void add_noise_flags(CLI::App* app, Options& o) {
  app->add_option("--visibility", o.visibility, "Fringe visibility V in [0,1]")->capture_default_str();
  app->add_option("--efficiency", o.efficiency, "Joint detection efficiency in (0,1]")->capture_default_str();
  app->add_option("--background", o.background, "Uniform background fraction in [0,1)")->capture_default_str();
  app->add_option("--trials", o.trials, "Emitted pairs per phase setting")->capture_default_str();
  app->add_option("--seed", o.seed, "Base seed")->capture_default_str();
}

analysis::RunConfig to_config(const Options& o, experiment::Kind kind) {
  auto c = analysis::RunConfig::defaults(kind);
  c.noise = {o.visibility, o.efficiency, o.background};
  c.trials = o.trials;
  c.seed = o.seed;
  if (o.phi_a) c.phi_a = *o.phi_a;
  if (o.phi_a_prime) c.phi_a_prime = *o.phi_a_prime;
  c.phi_b = o.phi_b;
  c.phi_c = o.phi_c;
  c.validate();
  return c;
}

void print_report(const analysis::Report& r, const Options& o) {
  const std::string json = analysis::to_json_string(r);
  if (!o.out.empty()) write_file(o.out, json);
  std::cout << (o.json ? json : analysis::render_text(r));
}

analysis::InequalityKind parse_inequality(const std::string& name) {
  return name == "chsh" ? analysis::InequalityKind::Chsh : analysis::InequalityKind::Mermin;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate and analyze noncontextual hidden-variable tests (pseudo-GHZ and event-ready CHSH)"};
  app.set_config("--config", "", "Read options from a TOML/INI file");
  app.require_subcommand(1);

  Options o;

  auto* scan = app.add_subcommand("scan", "Sweep phi_a at fixed phi_b (and phi_c); CSV of simulated estimates");
  scan->add_option("--experiment", o.experiment, "exp1 or exp2")
      ->check(CLI::IsMember({"exp1", "exp2"}))
      ->capture_default_str();
  add_noise_flags(scan, o);
  scan->add_option("--phi-b", o.phi_b, "phi_b in units of pi")->capture_default_str();
  scan->add_option("--phi-c", o.phi_c, "phi_c in units of pi (exp1)")->capture_default_str();
  scan->add_option("--sweep", o.sweep, "phi_a sweep start:stop:steps in units of pi")->capture_default_str();
  scan->add_option("--out", o.out, "CSV path (default stdout)");
  scan->add_option("--counts", o.counts, "Also write raw outcome counts as CSV");

  auto* exp1 = app.add_subcommand("exp1", "Simulated pseudo-GHZ falsification report");
  auto* exp2 = app.add_subcommand("exp2", "Simulated event-ready CHSH falsification report");
  for (auto* sub : {exp1, exp2}) {
    add_noise_flags(sub, o);
    sub->add_option("--phi-a", o.phi_a, "phi_a in units of pi");
    sub->add_option("--phi-a-prime", o.phi_a_prime, "phi_a' in units of pi");
    sub->add_option("--out", o.out, "JSON report path");
    sub->add_flag("--json", o.json, "Print the JSON report instead of the text summary");
  }

  std::string expression = "both";
  std::vector<double> values;
  std::vector<double> sigmas;
  auto* bound = app.add_subcommand("nchv-bound", "Classical bounds by enumeration; optional NCHV lower bound");
  bound->add_option("--expression", expression, "chsh, mermin or both")
      ->check(CLI::IsMember({"chsh", "mermin", "both"}))
      ->capture_default_str();
  bound->add_option("--values", values, "E(a,0,0),E(a',pi/2,0),E(a',0,pi/2) for the lower bound")
      ->delimiter(',')
      ->expected(3);
  bound->add_option("--sigmas", sigmas, "Standard errors of --values (one value applies to all)")->delimiter(',');
  bound->add_option("--out", o.out, "JSON path (default stdout)");

  double resolution = 1e-4;
  auto* threshold = app.add_subcommand("threshold", "Minimum visibility for a violation");
  threshold->add_option("--expression", expression, "chsh, mermin or both")
      ->check(CLI::IsMember({"chsh", "mermin", "both"}))
      ->capture_default_str();
  threshold->add_option("--resolution", resolution, "Visibility scan step")->capture_default_str();
  threshold->add_option("--out", o.out, "JSON path (default stdout)");

  std::string fixture;
  auto* replay = app.add_subcommand("replay", "Recompute derived quantities from published estimates");
  replay->add_option("values-file", fixture, "CSV with header phi_a,phi_b,phi_c,E,sigma (phases in units of pi)")
      ->required();
  replay->add_option("--out", o.out, "JSON report path");
  replay->add_flag("--json", o.json, "Print the JSON report instead of the text summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*scan) {
      auto c = to_config(o, o.experiment == "exp1" ? experiment::Kind::Ghz : experiment::Kind::EventReady);
      c.sweep = analysis::Sweep::parse(o.sweep);
      const auto rows = analysis::scan_phase(c);
      emit(o.out, analysis::scan_csv(rows));
      if (!o.counts.empty()) {
        std::vector<montecarlo::CoincidenceCounts> records;
        for (const auto& r : rows) records.push_back(r.counts);
        write_file(o.counts, analysis::counts_csv(records));
      }
    } else if (*exp1) {
      print_report(analysis::run_exp1_report(to_config(o, experiment::Kind::Ghz)), o);
    } else if (*exp2) {
      print_report(analysis::run_exp2_report(to_config(o, experiment::Kind::EventReady)), o);
    } else if (*replay) {
      print_report(analysis::replay(analysis::parse_fixture(fixture, true)), o);
    } else if (*threshold) {
      Json j = Json::array();
      for (const char* name : {"mermin", "chsh"}) {
        if (expression != "both" && expression != name) continue;
        j.push_back(analysis::to_json(analysis::threshold_study(parse_inequality(name), resolution)));
      }
      emit(o.out, j.dump(2) + "\n");
    } else if (*bound) {
      Json j;
      Json bounds = Json::array();
      const double h = experiment::kPi / 2;
      for (const char* name : {"mermin", "chsh"}) {
        if (expression != "both" && expression != name) continue;
        const bool chsh = std::string(name) == "chsh";
        const auto ex = chsh ? nchv::classical_extrema(nchv::chsh_expression(), nchv::chsh_grid(h / 2, -h / 2))
                             : nchv::classical_extrema(nchv::mermin_expression(), nchv::mermin_grid(h, 0.0));
        bounds.push_back({{"expression", name},
                          {"max", ex.max},
                          {"min", ex.min},
                          {"assignments", ex.assignments},
                          {"quantum_max", chsh ? nchv::kQuantumChshMax : nchv::kQuantumMerminMax}});
      }
      j["classical_bounds"] = bounds;
      if (!values.empty()) {
        if (sigmas.empty()) sigmas = {0.0};
        if (sigmas.size() == 1) sigmas.assign(3, sigmas.front());
        if (sigmas.size() != 3) throw ValidationError("--sigmas takes one or three values");
        const auto lb = nchv::nchv_lower_bound(values[0], values[1], values[2], {sigmas[0], sigmas[1], sigmas[2]});
        j["nchv_lower_bound"] = {{"value", lb.bound}, {"sigma", lb.sigma}};
      }
      emit(o.out, j.dump(2) + "\n");
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << fixture << ": " << e.what() << '\n';
    return kComputationError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kComputationError;
  }
  return 0;
}
