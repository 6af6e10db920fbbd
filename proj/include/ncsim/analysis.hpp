#pragma once

// Run configurations, simulated and replayed falsification reports, phase
// scans, visibility thresholds, and their CSV/JSON/text renderings.
//
// Phases enter configurations and replay fixtures in units of pi (0.46 means
// 0.46 pi) and are converted to radians on use; every other output is in
// radians.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ncsim/error.hpp"
#include "ncsim/experiment.hpp"
#include "ncsim/montecarlo.hpp"
#include "ncsim/nchv.hpp"

namespace ncsim::analysis {

using experiment::Kind;
using experiment::PhaseSetting;
using montecarlo::CoincidenceCounts;
using montecarlo::CorrelationEstimate;
using montecarlo::NoiseModel;
using Json = nlohmann::ordered_json;

inline constexpr std::uint64_t kDefaultSeed = 5457;
inline constexpr std::uint64_t kDefaultTrials = 10000;

inline double from_pi_units(double x) { return x * experiment::kPi; }

/// start:stop:steps in units of pi, inclusive of both ends.
struct Sweep {
  double start = 0.0;
  double stop = 2.0;
  std::size_t steps = 101;

  static Sweep parse(std::string_view text) {
    const auto first = text.find(':');
    const auto second = first == std::string_view::npos ? first : text.find(':', first + 1);
    if (second == std::string_view::npos || text.find(':', second + 1) != std::string_view::npos) {
      throw ValidationError("sweep must look like start:stop:steps, got '" + std::string(text) + "'");
    }
    Sweep s;
    try {
      std::size_t used = 0;
      const std::string a(text.substr(0, first));
      const std::string b(text.substr(first + 1, second - first - 1));
      const std::string c(text.substr(second + 1));
      s.start = std::stod(a, &used);
      if (used != a.size()) throw std::invalid_argument(a);
      s.stop = std::stod(b, &used);
      if (used != b.size()) throw std::invalid_argument(b);
      const long long n = std::stoll(c, &used);
      if (used != c.size() || n <= 0) throw std::invalid_argument(c);
      s.steps = static_cast<std::size_t>(n);
    } catch (const std::logic_error&) {
      throw ValidationError("sweep must look like start:stop:steps, got '" + std::string(text) + "'");
    }
    if (!std::isfinite(s.start) || !std::isfinite(s.stop)) throw ValidationError("sweep bounds must be finite");
    return s;
  }

  /// Grid points in radians.
  std::vector<double> points() const {
    std::vector<double> out;
    if (steps == 0) throw ValidationError("sweep grid must be non-empty");
    for (std::size_t i = 0; i < steps; ++i) {
      const double t = steps == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(steps - 1);
      out.push_back(from_pi_units(start + (stop - start) * t));
    }
    return out;
  }

  std::string to_string() const {
    std::ostringstream os;
    os.precision(17);
    os << start << ':' << stop << ':' << steps;
    return os.str();
  }
};

/// Everything a simulated run depends on. Phases in units of pi.
struct RunConfig {
  Kind experiment = Kind::Ghz;
  NoiseModel noise;
  std::uint64_t trials = kDefaultTrials;
  std::uint64_t seed = kDefaultSeed;
  double phi_a = 0.5;
  double phi_a_prime = 0.0;
  double phi_b = 0.0;
  double phi_c = 0.0;
  std::optional<Sweep> sweep;

  /// Nominal optimal settings: (pi/2, 0) for the Mermin-type test and
  /// (pi/4, -pi/4) for CHSH.
  static RunConfig defaults(Kind kind) {
    RunConfig c;
    c.experiment = kind;
    if (kind == Kind::EventReady) {
      c.phi_a = 0.25;
      c.phi_a_prime = -0.25;
    }
    return c;
  }

  void validate() const {
    noise.validate();
    if (trials == 0) throw ValidationError("trials must be positive");
    for (double p : {phi_a, phi_a_prime, phi_b, phi_c}) {
      if (!std::isfinite(p)) throw ValidationError("phases must be finite");
    }
  }
};

inline Json to_json(const RunConfig& c) {
  Json j;
  j["experiment"] = experiment::to_string(c.experiment);
  j["visibility"] = c.noise.visibility;
  j["efficiency"] = c.noise.efficiency;
  j["background"] = c.noise.background_fraction;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["phi_a_pi"] = c.phi_a;
  j["phi_a_prime_pi"] = c.phi_a_prime;
  j["phi_b_pi"] = c.phi_b;
  if (c.experiment == Kind::Ghz) j["phi_c_pi"] = c.phi_c;
  if (c.sweep) j["sweep"] = c.sweep->to_string();
  return j;
}

inline RunConfig config_from_json(const Json& j) {
  try {
    RunConfig c;
    const std::string e = j.at("experiment").get<std::string>();
    if (e == "exp1") {
      c.experiment = Kind::Ghz;
    } else if (e == "exp2") {
      c.experiment = Kind::EventReady;
    } else {
      throw ValidationError("unknown experiment '" + e + "'");
    }
    c.noise.visibility = j.at("visibility").get<double>();
    c.noise.efficiency = j.at("efficiency").get<double>();
    c.noise.background_fraction = j.at("background").get<double>();
    c.trials = j.at("trials").get<std::uint64_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.phi_a = j.at("phi_a_pi").get<double>();
    c.phi_a_prime = j.at("phi_a_prime_pi").get<double>();
    c.phi_b = j.at("phi_b_pi").get<double>();
    if (j.contains("phi_c_pi")) c.phi_c = j.at("phi_c_pi").get<double>();
    if (j.contains("sweep")) c.sweep = Sweep::parse(j.at("sweep").get<std::string>());
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError(std::string("malformed config: ") + ex.what());
  }
}

// ---------------------------------------------------------------------------
// Reports

struct NamedEstimate {
  std::string role;
  CorrelationEstimate estimate;
  std::optional<double> analytic;  // noisy quantum prediction, simulated runs only
};

struct Inequality {
  std::string name;  // "mermin" or "chsh"
  double value = 0.0;
  double sigma = 0.0;
  double classical_bound = nchv::kClassicalBound;
  double quantum_max = 0.0;
  std::optional<double> noisy_quantum;
  std::uint64_t enumerated_assignments = 0;

  bool violated() const noexcept { return std::abs(value) > classical_bound; }
};

/// (|value| - bound) / sigma; +-inf when sigma is zero.
inline double significance(double value, double bound, double sigma) {
  const double excess = std::abs(value) - bound;
  if (sigma > 0.0) return excess / sigma;
  if (excess == 0.0) return 0.0;
  return excess > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

struct Report {
  Kind experiment = Kind::Ghz;
  Json config;  // echo; has no seed in replay mode
  std::vector<NamedEstimate> estimates;
  Inequality inequality;
  std::optional<nchv::BoundEstimate> nchv_prediction;  // experiment 1
  std::optional<double> separation_sigma;              // experiment 1

  double significance() const {
    return analysis::significance(inequality.value, inequality.classical_bound, inequality.sigma);
  }
};

namespace detail {

inline std::vector<std::pair<std::string, PhaseSetting>> exp1_plan(double phi_a, double phi_a_prime) {
  const double h = experiment::kPi / 2;
  return {{"E(a,0,0)", PhaseSetting::ghz(phi_a, 0.0, 0.0)},
          {"E(a',pi/2,0)", PhaseSetting::ghz(phi_a_prime, h, 0.0)},
          {"E(a',0,pi/2)", PhaseSetting::ghz(phi_a_prime, 0.0, h)},
          {"E(a,pi/2,pi/2)", PhaseSetting::ghz(phi_a, h, h)}};
}

inline std::vector<std::pair<std::string, PhaseSetting>> exp2_plan(double phi_a, double phi_a_prime) {
  const double h = experiment::kPi / 2;
  return {{"E(a,0)", PhaseSetting::event_ready(phi_a, 0.0)},
          {"E(a,pi/2)", PhaseSetting::event_ready(phi_a, h)},
          {"E(a',pi/2)", PhaseSetting::event_ready(phi_a_prime, h)},
          {"E(a',0)", PhaseSetting::event_ready(phi_a_prime, 0.0)}};
}

/// Classical extrema of `expr` on the grid actually measured: A takes {a, a'}
/// (one phase if they coincide), B and C take {0, pi/2}.
inline nchv::Extrema enumerate_bound(nchv::Expression expr, double a, double a_prime, std::size_t observables) {
  std::vector<std::vector<double>> lists{{a}};
  if (a_prime != a) {
    lists[0].push_back(a_prime);
  } else {
    for (auto& t : expr) t.indices[0] = 0;
  }
  for (std::size_t k = 1; k < observables; ++k) lists.push_back({0.0, experiment::kPi / 2});
  return nchv::classical_extrema(expr, nchv::PhaseGrid(std::move(lists)));
}

/// Fills the derived quantities from four estimates in plan order.
inline void derive_exp1(Report& r) {
  const auto& e = r.estimates;
  const auto& ea = e[0].estimate;
  const auto& eb = e[1].estimate;
  const auto& ec = e[2].estimate;
  const auto& ed = e[3].estimate;
  r.nchv_prediction = nchv::nchv_lower_bound(ea.value, eb.value, ec.value, {ea.sigma, eb.sigma, ec.sigma});
  const double gap = r.nchv_prediction->bound - ed.value;
  const double combined = std::hypot(r.nchv_prediction->sigma, ed.sigma);
  r.separation_sigma = combined > 0.0   ? gap / combined
                       : gap == 0.0     ? 0.0
                                        : std::copysign(std::numeric_limits<double>::infinity(), gap);

  auto& q = r.inequality;
  q.name = "mermin";
  q.value = nchv::mermin_value(ed.value, ea.value, eb.value, ec.value);
  q.sigma = montecarlo::propagate_error({{ed.value, ed.sigma}, {ea.value, ea.sigma}, {eb.value, eb.sigma}, {ec.value, ec.sigma}},
                                        {1, -1, -1, -1})
                .sigma;
  q.quantum_max = nchv::kQuantumMerminMax;
  const auto extrema = enumerate_bound(nchv::mermin_expression(), ea.setting.phi_a, eb.setting.phi_a, 3);
  q.classical_bound = extrema.max;
  q.enumerated_assignments = extrema.assignments;
  if (e[0].analytic) q.noisy_quantum = *e[3].analytic - *e[0].analytic - *e[1].analytic - *e[2].analytic;
}

inline void derive_exp2(Report& r) {
  const auto& e = r.estimates;
  auto& q = r.inequality;
  q.name = "chsh";
  q.value = nchv::chsh_value(e[0].estimate.value, e[1].estimate.value, e[2].estimate.value, e[3].estimate.value);
  std::vector<std::pair<double, double>> terms;
  for (const auto& x : e) terms.emplace_back(x.estimate.value, x.estimate.sigma);
  q.sigma = montecarlo::propagate_error(terms, {1, 1, 1, -1}).sigma;
  q.quantum_max = nchv::kQuantumChshMax;
  const double a = e[0].estimate.setting.phi_a;
  const double a_prime = e[2].estimate.setting.phi_a;
  const auto extrema = enumerate_bound(nchv::chsh_expression(), a, a_prime, 2);
  q.classical_bound = extrema.max;
  q.enumerated_assignments = extrema.assignments;
  if (e[0].analytic) q.noisy_quantum = *e[0].analytic + *e[1].analytic + *e[2].analytic - *e[3].analytic;
}

inline Report simulate(const RunConfig& config, Kind kind) {
  config.validate();
  RunConfig c = config;
  c.experiment = kind;
  const double a = from_pi_units(c.phi_a);
  const double a_prime = from_pi_units(c.phi_a_prime);
  const auto plan = kind == Kind::Ghz ? exp1_plan(a, a_prime) : exp2_plan(a, a_prime);

  Report r;
  r.experiment = kind;
  r.config = to_json(c);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const auto counts = montecarlo::sample_counts(plan[i].second, c.noise, c.trials, montecarlo::stream_seed(c.seed, i));
    r.estimates.push_back({plan[i].first, montecarlo::estimate_correlation(counts),
                           montecarlo::noisy_correlation(plan[i].second, c.noise)});
  }
  if (kind == Kind::Ghz) {
    derive_exp1(r);
  } else {
    derive_exp2(r);
  }
  return r;
}

}  // namespace detail

/// Simulates the four settings (a,0,0), (a',pi/2,0), (a',0,pi/2), (a,pi/2,pi/2)
/// and confronts the NCHV lower bound with the fourth correlation.
inline Report run_exp1_report(const RunConfig& config) { return detail::simulate(config, Kind::Ghz); }

/// Simulates (a,0), (a,pi/2), (a',pi/2), (a',0) and evaluates CHSH.
inline Report run_exp2_report(const RunConfig& config) { return detail::simulate(config, Kind::EventReady); }

// ---------------------------------------------------------------------------
// Phase scans

struct ScanRow {
  CoincidenceCounts counts;
  CorrelationEstimate estimate;
  double analytic;
};

/// One simulated estimate per point of the phi_a sweep at fixed phi_b (and phi_c).
inline std::vector<ScanRow> scan_phase(const RunConfig& config) {
  config.validate();
  const Sweep sweep = config.sweep.value_or(Sweep{});
  std::vector<ScanRow> rows;
  const auto points = sweep.points();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const PhaseSetting s = config.experiment == Kind::Ghz
                               ? PhaseSetting::ghz(points[i], from_pi_units(config.phi_b), from_pi_units(config.phi_c))
                               : PhaseSetting::event_ready(points[i], from_pi_units(config.phi_b));
    auto counts = montecarlo::sample_counts(s, config.noise, config.trials, montecarlo::stream_seed(config.seed, i));
    auto estimate = montecarlo::estimate_correlation(counts);
    rows.push_back({std::move(counts), estimate, montecarlo::noisy_correlation(s, config.noise)});
  }
  return rows;
}

inline std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline constexpr std::string_view kScanHeader = "phi_a,phi_b,phi_c,E_est,sigma,N_detected,E_analytic";
inline constexpr std::string_view kCountsHeader = "phi_a,phi_b,phi_c,a,b,c,count,trials,detected,seed";

inline std::string scan_csv(const std::vector<ScanRow>& rows) {
  std::string out(kScanHeader);
  out += '\n';
  for (const auto& row : rows) {
    const PhaseSetting s = row.estimate.setting.canonical();
    out += format_number(s.phi_a) + ',' + format_number(s.phi_b) + ',' + (s.phi_c ? format_number(*s.phi_c) : "") + ',' +
           format_number(row.estimate.value) + ',' + format_number(row.estimate.sigma) + ',' +
           std::to_string(row.estimate.n) + ',' + format_number(row.analytic) + '\n';
  }
  return out;
}

/// One line per outcome bin of every record.
inline std::string counts_csv(const std::vector<CoincidenceCounts>& records) {
  std::string out(kCountsHeader);
  out += '\n';
  for (const auto& rec : records) {
    const PhaseSetting s = rec.setting.canonical();
    const auto outcomes = experiment::all_outcomes(rec.kind());
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      const auto& o = outcomes[i];
      out += format_number(s.phi_a) + ',' + format_number(s.phi_b) + ',' + (s.phi_c ? format_number(*s.phi_c) : "") + ',' +
             std::to_string(experiment::value(o.a)) + ',' + std::to_string(experiment::value(o.b)) + ',' +
             (o.c ? std::to_string(experiment::value(*o.c)) : "") + ',' + std::to_string(rec.counts[i]) + ',' +
             std::to_string(rec.trials) + ',' + std::to_string(rec.detected) + ',' + std::to_string(rec.seed) + '\n';
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Visibility thresholds

enum class InequalityKind { Chsh, Mermin };

struct ThresholdResult {
  InequalityKind inequality;
  double visibility;  // smallest scanned V whose noisy quantum value beats the bound
  double resolution;
  double cited_efficiency_threshold = nchv::kCitedEfficiencyThreshold;
};

/// Noisy quantum value of the inequality at its nominal optimal settings.
inline double noisy_inequality_value(InequalityKind kind, double visibility) {
  NoiseModel noise{visibility, 1.0, 0.0};
  const double h = experiment::kPi / 2;
  auto e = [&](const PhaseSetting& s) { return montecarlo::noisy_correlation(s, noise); };
  if (kind == InequalityKind::Mermin) {
    return e(PhaseSetting::ghz(h, h, h)) - e(PhaseSetting::ghz(h, 0, 0)) - e(PhaseSetting::ghz(0, h, 0)) -
           e(PhaseSetting::ghz(0, 0, h));
  }
  const double a = experiment::kPi / 4;
  return e(PhaseSetting::event_ready(a, 0)) + e(PhaseSetting::event_ready(a, h)) +
         e(PhaseSetting::event_ready(-a, h)) - e(PhaseSetting::event_ready(-a, 0));
}

inline ThresholdResult threshold_study(InequalityKind kind, double resolution) {
  if (!(resolution > 0.0) || resolution > 1.0) throw ValidationError("resolution must lie in (0, 1]");
  const auto steps = static_cast<std::uint64_t>(std::ceil(1.0 / resolution));
  for (std::uint64_t k = 0; k <= steps; ++k) {
    const double v = std::min(1.0, static_cast<double>(k) * resolution);
    if (std::abs(noisy_inequality_value(kind, v)) > nchv::kClassicalBound) return {kind, v, resolution};
  }
  throw ValidationError("no visibility in [0, 1] violates the bound");
}

// ---------------------------------------------------------------------------
// Replay of published estimates

struct FixtureRow {
  double phi_a;  // units of pi
  double phi_b;
  std::optional<double> phi_c;
  double value;
  double sigma;
};

inline constexpr std::string_view kFixtureHeader = "phi_a,phi_b,phi_c,E,sigma";

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(field);
      field.clear();
    } else {
      field += ch;
    }
  }
  fields.push_back(field);
  return fields;
}

inline double parse_number(const std::string& text, std::size_t line, const char* column) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::logic_error&) {
    throw ParseError(line, std::string("column ") + column + ": '" + text + "' is not a number");
  }
  if (used != text.size() || !std::isfinite(v)) {
    throw ParseError(line, std::string("column ") + column + ": '" + text + "' is not a number");
  }
  return v;
}

inline bool near(double x, double y) { return std::abs(x - y) < 1e-9; }

}  // namespace detail

inline std::vector<FixtureRow> parse_fixture(std::istream& in) {
  std::vector<FixtureRow> rows;
  std::string line;
  std::size_t number = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kFixtureHeader) throw ParseError(number, "expected header '" + std::string(kFixtureHeader) + "'");
      header_seen = true;
      continue;
    }
    const auto f = detail::split_csv_line(line);
    if (f.size() != 5) throw ParseError(number, "expected 5 fields, got " + std::to_string(f.size()));
    FixtureRow r{};
    r.phi_a = detail::parse_number(f[0], number, "phi_a");
    r.phi_b = detail::parse_number(f[1], number, "phi_b");
    if (!f[2].empty()) r.phi_c = detail::parse_number(f[2], number, "phi_c");
    r.value = detail::parse_number(f[3], number, "E");
    r.sigma = detail::parse_number(f[4], number, "sigma");
    if (std::abs(r.value) > 1.0 + nchv::kCorrelationSlack) throw ParseError(number, "E outside [-1, 1]");
    if (r.sigma < 0.0) throw ParseError(number, "negative sigma");
    if (!rows.empty() && rows.front().phi_c.has_value() != r.phi_c.has_value()) {
      throw ParseError(number, "rows mix experiment 1 and experiment 2 settings");
    }
    rows.push_back(r);
  }
  if (!header_seen) throw ParseError(number + 1, "empty fixture");
  if (rows.empty()) throw ParseError(number + 1, "fixture has no data rows");
  if (rows.size() != 4) throw ParseError(number + 1, "expected 4 data rows, got " + std::to_string(rows.size()));
  return rows;
}

inline std::vector<FixtureRow> parse_fixture(const std::string& text_or_path, bool is_path) {
  if (!is_path) {
    std::istringstream in(text_or_path);
    return parse_fixture(in);
  }
  std::ifstream in(text_or_path);
  if (!in) throw ValidationError("cannot open '" + text_or_path + "'");
  return parse_fixture(in);
}

/// Recomputes every derived quantity from published estimates; no sampling.
///
/// Experiment 1 rows are matched by their (phi_b, phi_c) pattern: (0,0) and
/// (1/2,1/2) share phi_a, while (1/2,0) and (0,1/2) share phi_a'. Experiment 2
/// takes phi_a from the first row; the other value is phi_a'.
inline Report replay(const std::vector<FixtureRow>& rows) {
  Report r;
  Json echo;
  echo["mode"] = "replay";
  Json jrows = Json::array();
  for (const auto& row : rows) {
    Json jr;
    jr["phi_a_pi"] = row.phi_a;
    jr["phi_b_pi"] = row.phi_b;
    if (row.phi_c) jr["phi_c_pi"] = *row.phi_c;
    jr["E"] = row.value;
    jr["sigma"] = row.sigma;
    jrows.push_back(jr);
  }
  echo["rows"] = jrows;

  auto estimate = [](const FixtureRow& row) {
    const PhaseSetting s = row.phi_c ? PhaseSetting::ghz(from_pi_units(row.phi_a), from_pi_units(row.phi_b),
                                                         from_pi_units(*row.phi_c))
                                     : PhaseSetting::event_ready(from_pi_units(row.phi_a), from_pi_units(row.phi_b));
    return CorrelationEstimate{row.value, row.sigma, 0, s};
  };
  auto find = [&](auto pred, const char* what) -> const FixtureRow& {
    const FixtureRow* hit = nullptr;
    for (const auto& row : rows) {
      if (pred(row)) {
        if (hit) throw ValidationError(std::string("replay: duplicate row for ") + what);
        hit = &row;
      }
    }
    if (!hit) throw ValidationError(std::string("replay: missing row for ") + what);
    return *hit;
  };
  using detail::near;

  if (rows.size() != 4) throw ValidationError("replay needs exactly four rows");
  if (rows.front().phi_c) {
    r.experiment = Kind::Ghz;
    echo["experiment"] = "exp1";
    const auto& r00 = find([](const FixtureRow& x) { return near(x.phi_b, 0) && near(*x.phi_c, 0); }, "(phi_b, phi_c) = (0, 0)");
    const auto& r10 = find([](const FixtureRow& x) { return near(x.phi_b, 0.5) && near(*x.phi_c, 0); }, "(1/2, 0)");
    const auto& r01 = find([](const FixtureRow& x) { return near(x.phi_b, 0) && near(*x.phi_c, 0.5); }, "(0, 1/2)");
    const auto& r11 = find([](const FixtureRow& x) { return near(x.phi_b, 0.5) && near(*x.phi_c, 0.5); }, "(1/2, 1/2)");
    if (!near(r00.phi_a, r11.phi_a) || !near(r10.phi_a, r01.phi_a)) {
      throw ValidationError("replay: experiment 1 rows do not share phi_a / phi_a' as required");
    }
    r.estimates = {{"E(a,0,0)", estimate(r00), std::nullopt},
                   {"E(a',pi/2,0)", estimate(r10), std::nullopt},
                   {"E(a',0,pi/2)", estimate(r01), std::nullopt},
                   {"E(a,pi/2,pi/2)", estimate(r11), std::nullopt}};
    r.config = echo;
    detail::derive_exp1(r);
  } else {
    r.experiment = Kind::EventReady;
    echo["experiment"] = "exp2";
    const double a = rows.front().phi_a;
    const auto& a0 = find([&](const FixtureRow& x) { return near(x.phi_a, a) && near(x.phi_b, 0); }, "(a, 0)");
    const auto& a1 = find([&](const FixtureRow& x) { return near(x.phi_a, a) && near(x.phi_b, 0.5); }, "(a, 1/2)");
    const auto& p1 = find([&](const FixtureRow& x) { return !near(x.phi_a, a) && near(x.phi_b, 0.5); }, "(a', 1/2)");
    const auto& p0 = find([&](const FixtureRow& x) { return !near(x.phi_a, a) && near(x.phi_b, 0); }, "(a', 0)");
    if (!near(p0.phi_a, p1.phi_a)) throw ValidationError("replay: experiment 2 rows use more than two phi_a values");
    r.estimates = {{"E(a,0)", estimate(a0), std::nullopt},
                   {"E(a,pi/2)", estimate(a1), std::nullopt},
                   {"E(a',pi/2)", estimate(p1), std::nullopt},
                   {"E(a',0)", estimate(p0), std::nullopt}};
    r.config = echo;
    detail::derive_exp2(r);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Rendering

namespace detail {

inline Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

inline Json to_json(const CorrelationEstimate& e) {
  const PhaseSetting s = e.setting.canonical();
  Json j;
  j["phi_a"] = s.phi_a;
  j["phi_b"] = s.phi_b;
  if (s.phi_c) j["phi_c"] = *s.phi_c;
  j["E"] = e.value;
  j["sigma"] = e.sigma;
  j["n"] = e.n;
  return j;
}

inline std::string fixed(double x, int digits = 3) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

}  // namespace detail

inline Json to_json(const Report& r) {
  Json j;
  j["config"] = r.config;
  Json est = Json::array();
  for (const auto& e : r.estimates) {
    Json x = detail::to_json(e.estimate);
    x["role"] = e.role;
    if (e.analytic) x["E_analytic"] = *e.analytic;
    est.push_back(x);
  }
  j["estimates"] = est;

  Json d;
  if (r.nchv_prediction) {
    d["nchv_lower_bound"] = {{"value", r.nchv_prediction->bound}, {"sigma", r.nchv_prediction->sigma}};
    const auto& fourth = r.estimates.back().estimate;
    d["measured_fourth"] = {{"value", fourth.value}, {"sigma", fourth.sigma}};
    d["separation_sigma"] = detail::number_or_null(*r.separation_sigma);
  }
  const auto& q = r.inequality;
  Json ineq;
  ineq["value"] = q.value;
  ineq["sigma"] = q.sigma;
  ineq["classical_bound"] = q.classical_bound;
  ineq["enumerated_assignments"] = q.enumerated_assignments;
  ineq["quantum_max"] = q.quantum_max;
  if (q.noisy_quantum) ineq["noisy_quantum"] = *q.noisy_quantum;
  ineq["significance"] = detail::number_or_null(r.significance());
  d[q.name] = ineq;
  j["derived"] = d;

  Json v;
  v["violated"] = q.violated();
  v["significance"] = detail::number_or_null(r.significance());
  v["statement"] = q.violated() ? "noncontextual hidden variables falsified (modulo fair sampling)"
                                : "no violation of the noncontextual bound";
  j["verdict"] = v;
  return j;
}

inline std::string to_json_string(const Report& r) { return to_json(r).dump(2) + "\n"; }

/// Human-readable summary rounded to three decimals.
inline std::string render_text(const Report& r) {
  using detail::fixed;
  std::ostringstream os;
  const bool replayed = !r.config.contains("seed");
  os << (r.experiment == Kind::Ghz ? "experiment 1 (pseudo-GHZ, Mermin-type inequality)"
                                   : "experiment 2 (event-ready, Bell-CHSH inequality)")
     << (replayed ? " [replay]" : "") << '\n';
  if (!replayed) os << "seed " << r.config.at("seed").get<std::uint64_t>() << '\n';
  for (const auto& e : r.estimates) {
    os << "  " << e.role << " = " << fixed(e.estimate.value) << " +- " << fixed(e.estimate.sigma);
    if (e.analytic) os << "  (quantum " << fixed(*e.analytic) << ")";
    os << '\n';
  }
  if (r.nchv_prediction) {
    os << "  NCHV lower bound on fourth correlation: " << fixed(r.nchv_prediction->bound) << " +- "
       << fixed(r.nchv_prediction->sigma) << '\n';
    os << "  measured fourth correlation: " << fixed(r.estimates.back().estimate.value) << " +- "
       << fixed(r.estimates.back().estimate.sigma) << " (separation " << fixed(*r.separation_sigma, 1) << " sigma)\n";
  }
  const auto& q = r.inequality;
  os << "  " << q.name << " = " << fixed(q.value) << " +- " << fixed(q.sigma) << "  (classical bound "
     << fixed(q.classical_bound, 0) << ", quantum max " << fixed(q.quantum_max) << ")\n";
  os << "  verdict: " << (q.violated() ? "violation" : "no violation") << ", " << fixed(r.significance(), 1)
     << " sigma\n";
  return os.str();
}

inline Json to_json(const ThresholdResult& t) {
  Json j;
  j["inequality"] = t.inequality == InequalityKind::Chsh ? "chsh" : "mermin";
  j["threshold_visibility"] = t.visibility;
  j["resolution"] = t.resolution;
  j["cited_efficiency_threshold"] = t.cited_efficiency_threshold;
  j["cited_efficiency_threshold_derived"] = false;
  return j;
}

}  // namespace ncsim::analysis
