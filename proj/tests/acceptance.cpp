// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ncsim/analysis.hpp"
#include "ncsim/experiment.hpp"
#include "ncsim/montecarlo.hpp"
#include "ncsim/nchv.hpp"

using namespace ncsim;
using experiment::kPi;
using experiment::PhaseSetting;

namespace {

constexpr double kExact = 1e-12;
constexpr double kHalfPi = kPi / 2;

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += "FAILED " + what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string num(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

// Settings measured in the first experiment, in units of pi: (a,0,0), (a',1/2,0),
// (a',0,1/2), (a,1/2,1/2) with a = 0.46, a' = 0.01.
std::vector<PhaseSetting> published_exp1_settings() {
  const double a = 0.46 * kPi, ap = 0.01 * kPi;
  return {PhaseSetting::ghz(a, 0, 0), PhaseSetting::ghz(ap, kHalfPi, 0), PhaseSetting::ghz(ap, 0, kHalfPi),
          PhaseSetting::ghz(a, kHalfPi, kHalfPi)};
}

Check closed_form_fidelity() {
  Check c;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> phase(-2 * kPi, 2 * kPi);
  double worst_p = 0, worst_e3 = 0, worst_e2 = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto s = PhaseSetting::ghz(phase(rng), phase(rng), phase(rng));
    for (const auto& o : experiment::all_outcomes(experiment::Kind::Ghz)) {
      const double closed = (1.0 + o.product() * std::sin(s.phi_a + s.phi_b + *s.phi_c)) / 8.0;
      worst_p = std::max(worst_p, std::abs(experiment::joint_probability_projected(o, s) - closed));
    }
    worst_e3 = std::max(worst_e3, std::abs(experiment::correlation_qm3_projected(s) - std::sin(s.total())));
    worst_e3 = std::max(worst_e3, std::abs(experiment::correlation_qm3(s) - std::sin(s.total())));
    worst_e2 = std::max(worst_e2, std::abs(experiment::correlation_qm2_projected(s.phi_a, s.phi_b) -
                                           std::sin(s.phi_a + s.phi_b)));
  }
  c.require(worst_p <= kExact, "P projector vs closed form");
  c.require(worst_e3 <= kExact, "E3 vs sin");
  c.require(worst_e2 <= kExact, "E2 vs sin");
  c.note("max |dP|=" + num(worst_p) + " |dE3|=" + num(worst_e3) + " |dE2|=" + num(worst_e2));
  return c;
}

Check ghz_contradiction() {
  Check c;
  auto e = [](double a, double b, double cc) { return experiment::correlation_qm3_projected(PhaseSetting::ghz(a, b, cc)); };
  c.require(std::abs(e(kHalfPi, 0, 0) - 1) <= kExact, "E(pi/2,0,0)=1");
  c.require(std::abs(e(0, kHalfPi, 0) - 1) <= kExact, "E(0,pi/2,0)=1");
  c.require(std::abs(e(0, 0, kHalfPi) - 1) <= kExact, "E(0,0,pi/2)=1");
  c.require(std::abs(e(kHalfPi, kHalfPi, kHalfPi) + 1) <= kExact, "E(pi/2,pi/2,pi/2)=-1");
  c.require(nchv::ghz_forcing(1, 1, 1) == 1, "ghz_forcing(+1,+1,+1)=+1");
  const auto en = nchv::ghz_forcing_enumerated(1, 1, 1);
  c.require(en.consistent > 0 && en.products == std::set<int>{1}, "enumeration forces +1");
  c.note(std::to_string(en.consistent) + "/64 assignments satisfy the constraints, all give +1");
  return c;
}

Check classical_bounds() {
  Check c;
  const auto chsh = nchv::classical_extrema(nchv::chsh_expression(), nchv::chsh_grid(kPi / 4, -kPi / 4));
  const auto mermin = nchv::classical_extrema(nchv::mermin_expression(), nchv::mermin_grid(kHalfPi, 0));
  c.require(chsh.max == 2.0 && chsh.assignments == 16, "CHSH bound 2 over 16");
  c.require(mermin.max == 2.0 && mermin.assignments == 64, "Mermin bound 2 over 64");

  double best = -10;
  const int n = 100;
  for (int i = 0; i < n; ++i) {
    const double a = -kPi + 2 * kPi * i / (n - 1);
    for (int j = 0; j < n; ++j) {
      const double ap = -kPi + 2 * kPi * j / (n - 1);
      const double s = experiment::correlation_qm2_projected(a, 0) + experiment::correlation_qm2_projected(a, kHalfPi) +
                       experiment::correlation_qm2_projected(ap, kHalfPi) - experiment::correlation_qm2_projected(ap, 0);
      best = std::max(best, s);
    }
  }
  c.require(std::abs(best - 2 * std::numbers::sqrt2) <= 1e-3, "quantum CHSH max within 1e-3 of 2sqrt2");
  c.note("CHSH " + num(chsh.max) + " (16), Mermin " + num(mermin.max) + " (64), scan max " + num(best, 7));
  return c;
}

Check replay_published() {
  Check c;
  const auto r1 = analysis::replay(analysis::parse_fixture(std::string(NCSIM_DATA_DIR) + "/exp1_published.csv", true));
  const auto r2 = analysis::replay(analysis::parse_fixture(std::string(NCSIM_DATA_DIR) + "/exp2_published.csv", true));
  const auto& b = *r1.nchv_prediction;
  c.require(std::abs(b.bound - 0.666) <= kExact, "bound 0.666");
  c.require(b.sigma >= 0.0080 && b.sigma <= 0.0090, "bound sigma in [0.0080, 0.0090]");
  c.require(std::abs(r2.inequality.value - 2.595) <= kExact, "CHSH 2.595");
  c.require(r2.inequality.sigma >= 0.015 && r2.inequality.sigma <= 0.017, "CHSH sigma in [0.015, 0.017]");
  c.note("bound " + num(b.bound) + " +- " + num(b.sigma) + ", CHSH " + num(r2.inequality.value) + " +- " +
         num(r2.inequality.sigma));
  return c;
}

Check monte_carlo_published_scale() {
  Check c;
  const montecarlo::NoiseModel noise{0.885, 1.0, 0.0};
  const int seeds = 200;
  // 10000 pairs put about 5000 events on the four registered (A = +1) detectors.
  const std::uint64_t trials = 10000;
  const auto settings = published_exp1_settings();
  double worst_bias = 0, worst_ratio = 0;
  for (std::size_t k = 0; k < settings.size(); ++k) {
    double sum = 0, sum2 = 0, sigma_sum = 0, n_sum = 0;
    for (int s = 0; s < seeds; ++s) {
      const auto e = montecarlo::estimate_correlation_exp1(
          montecarlo::sample_counts(settings[k], noise, trials, montecarlo::stream_seed(500 + k, s)));
      sum += e.value;
      sum2 += e.value * e.value;
      sigma_sum += e.sigma;
      n_sum += static_cast<double>(e.n);
    }
    const double mean = sum / seeds;
    const double sd = std::sqrt((sum2 - seeds * mean * mean) / (seeds - 1));
    const double declared = sigma_sum / seeds;
    worst_bias = std::max(worst_bias, std::abs(mean - noise.visibility * std::sin(settings[k].total())));
    worst_ratio = std::max(worst_ratio, std::abs(sd / declared - 1));
    c.require(std::abs(n_sum / seeds - 5000) < 50, "about 5000 registered events per setting");
  }
  c.require(worst_bias <= 0.01, "mean within 0.01 of V sin");
  c.require(worst_ratio <= 0.15, "empirical sigma within 15% of declared");
  const double formula = montecarlo::correlation_sigma(0.885, 5000);
  const double factor = formula / 0.005;
  c.require(factor <= 1.5 && factor >= 1 / 1.5, "published 0.005 within factor 1.5 of formula");
  c.note("max bias " + num(worst_bias) + ", max |sd/sigma-1| " + num(worst_ratio) + ", formula sigma " + num(formula) +
         " vs published 0.005 (x" + num(factor, 3) + ", documented discrepancy)");
  return c;
}

Check violation_significance() {
  Check c;
  analysis::RunConfig e1 = analysis::RunConfig::defaults(experiment::Kind::Ghz);
  e1.noise.visibility = 0.885;
  e1.trials = 10000;
  e1.phi_a = 0.46;
  e1.phi_a_prime = 0.01;
  const auto r1 = analysis::run_exp1_report(e1);
  c.require(*r1.separation_sigma > 50, "exp1 separation > 50 sigma");

  analysis::RunConfig e2 = analysis::RunConfig::defaults(experiment::Kind::EventReady);
  e2.noise.visibility = 0.92;
  e2.trials = 5000;
  const auto r2 = analysis::run_exp2_report(e2);
  c.require(r2.inequality.violated() && r2.significance() > 10, "exp2 CHSH violation > 10 sigma");
  c.note("exp1 bound " + num(r1.nchv_prediction->bound, 3) + " vs fourth " + num(r1.estimates.back().estimate.value, 3) +
         ": " + num(*r1.separation_sigma, 4) + " sigma; exp2 S=" + num(r2.inequality.value, 4) + ": " +
         num(r2.significance(), 4) + " sigma");
  return c;
}

Check thresholds() {
  Check c;
  const auto m = analysis::threshold_study(analysis::InequalityKind::Mermin, 1e-4);
  const auto s = analysis::threshold_study(analysis::InequalityKind::Chsh, 1e-4);
  c.require(std::abs(m.visibility - 0.5) <= 1e-3, "Mermin V* = 0.5");
  c.require(std::abs(s.visibility - 0.7071) <= 1e-3, "CHSH V* = 0.7071");
  c.note("Mermin V*=" + num(m.visibility, 6) + ", CHSH V*=" + num(s.visibility, 6));
  return c;
}

Check fair_sampling() {
  Check c;
  const montecarlo::NoiseModel full{0.885, 1.0, 0.0};
  const montecarlo::NoiseModel thin{0.885, 0.08, 0.0};
  double worst = 0;
  const auto settings = published_exp1_settings();
  for (std::size_t k = 0; k < settings.size(); ++k) {
    const auto a = montecarlo::estimate_correlation_exp1(montecarlo::sample_counts(settings[k], full, 10000, 900 + k));
    const auto b = montecarlo::estimate_correlation_exp1(montecarlo::sample_counts(settings[k], thin, 125000, 950 + k));
    const double z = std::abs(a.value - b.value) / std::hypot(a.sigma, b.sigma);
    worst = std::max(worst, z);
  }
  c.require(worst < 4, "eta=0.08 vs eta=1 within 4 sigma");
  c.note("max separation " + num(worst, 3) + " sigma");
  return c;
}

Check determinism() {
  Check c;
  analysis::RunConfig scan = analysis::RunConfig::defaults(experiment::Kind::Ghz);
  scan.noise = {0.885, 0.08, 0.01};
  scan.trials = 20000;
  scan.sweep = analysis::Sweep::parse("0:2:41");
  const auto csv1 = analysis::scan_csv(analysis::scan_phase(scan));
  const auto csv2 = analysis::scan_csv(analysis::scan_phase(scan));
  c.require(csv1 == csv2, "scan CSV byte-identical");

  auto e1 = analysis::RunConfig::defaults(experiment::Kind::Ghz);
  e1.noise.visibility = 0.885;
  auto e2 = analysis::RunConfig::defaults(experiment::Kind::EventReady);
  e2.noise.visibility = 0.92;
  c.require(analysis::to_json_string(analysis::run_exp1_report(e1)) ==
                analysis::to_json_string(analysis::run_exp1_report(e1)),
            "exp1 JSON byte-identical");
  c.require(analysis::to_json_string(analysis::run_exp2_report(e2)) ==
                analysis::to_json_string(analysis::run_exp2_report(e2)),
            "exp2 JSON byte-identical");
  c.note(std::to_string(csv1.size()) + "-byte CSV and both JSON reports reproduced");
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
      {"1 closed-form fidelity", closed_form_fidelity},
      {"2 GHZ contradiction", ghz_contradiction},
      {"3 classical bounds by enumeration", classical_bounds},
      {"4 replay of published numbers", replay_published},
      {"5 Monte Carlo at published scale", monte_carlo_published_scale},
      {"6 violation significance", violation_significance},
      {"7 visibility thresholds", thresholds},
      {"8 fair-sampling neutrality", fair_sampling},
      {"9 determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Check result;
    try {
      result = run();
    } catch (const std::exception& ex) {
      result.ok = false;
      result.detail = std::string("exception: ") + ex.what();
    }
    std::printf("[%s] criterion %s: %s\n", result.ok ? "PASS" : "FAIL", name.c_str(), result.detail.c_str());
    failures += result.ok ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
