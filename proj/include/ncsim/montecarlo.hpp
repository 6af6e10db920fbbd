#pragma once

// Finite-statistics counting experiments and the estimators applied to them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ncsim/error.hpp"
#include "ncsim/experiment.hpp"

namespace ncsim::montecarlo {

using experiment::Kind;
using experiment::Outcome;
using experiment::PhaseSetting;

struct NoiseModel {
  double visibility = 1.0;
  double efficiency = 1.0;
  double background_fraction = 0.0;

  void validate() const {
    if (!(visibility >= 0.0 && visibility <= 1.0)) throw ValidationError("visibility must lie in [0, 1]");
    if (!(efficiency > 0.0 && efficiency <= 1.0)) throw ValidationError("efficiency must lie in (0, 1]");
    if (!(background_fraction >= 0.0 && background_fraction < 1.0)) {
      throw ValidationError("background fraction must lie in [0, 1)");
    }
  }

  friend bool operator==(const NoiseModel&, const NoiseModel&) = default;
};

/// White-noise admixture on top of the ideal prediction:
///   P = V P_ideal + (1 - V) u, then P <- (1 - beta) P + beta u,
/// with u = 1/8 (three outcomes) or 1/4 (two outcomes).
inline double noisy_probability(const Outcome& outcome, const PhaseSetting& setting, const NoiseModel& noise) {
  noise.validate();
  const double uniform = setting.kind() == Kind::Ghz ? 1.0 / 8.0 : 1.0 / 4.0;
  const double p = noise.visibility * experiment::ideal_probability(outcome, setting) + (1.0 - noise.visibility) * uniform;
  return (1.0 - noise.background_fraction) * p + noise.background_fraction * uniform;
}

/// Correlation implied by noisy_probability, i.e. the large-N limit of the estimators.
inline double noisy_correlation(const PhaseSetting& setting, const NoiseModel& noise) {
  double e = 0.0;
  for (const Outcome& o : experiment::all_outcomes(setting.kind())) e += o.product() * noisy_probability(o, setting, noise);
  return e;
}

// ---------------------------------------------------------------------------
// Random numbers

/// SplitMix64 finalizer; used to expand user seeds and derive stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the `index`-th independent stream under a base seed.
constexpr std::uint64_t stream_seed(std::uint64_t base, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(base) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// mt19937_64 with a platform-independent mapping to [0, 1).
class Generator {
 public:
  explicit Generator(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Counts

/// Event counts at one phase setting, indexed like experiment::all_outcomes.
struct CoincidenceCounts {
  PhaseSetting setting;
  std::vector<std::uint64_t> counts;
  std::uint64_t trials = 0;
  std::uint64_t detected = 0;
  std::uint64_t seed = 0;

  Kind kind() const noexcept { return setting.kind(); }

  std::uint64_t count(const Outcome& outcome) const {
    const auto outcomes = experiment::all_outcomes(kind());
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      if (outcomes[i] == outcome) return counts.at(i);
    }
    throw StructuralError("outcome does not belong to this experiment");
  }

  void validate() const {
    if (counts.size() != experiment::all_outcomes(kind()).size()) throw StructuralError("wrong number of outcome bins");
    std::uint64_t sum = 0;
    for (auto c : counts) sum += c;
    if (sum != detected) throw ValidationError("outcome counts do not sum to the detected total");
    if (detected > trials) throw ValidationError("more detections than trials");
  }

  /// Pooled counts of two runs at the same setting. The seed of the pooled
  /// record is that of the left operand.
  friend CoincidenceCounts operator+(CoincidenceCounts lhs, const CoincidenceCounts& rhs) {
    if (!(lhs.setting == rhs.setting)) throw StructuralError("cannot pool counts from different settings");
    for (std::size_t i = 0; i < lhs.counts.size(); ++i) lhs.counts[i] += rhs.counts.at(i);
    lhs.trials += rhs.trials;
    lhs.detected += rhs.detected;
    return lhs;
  }
};

/// Simulates `trials` emitted pairs. Each pair is detected with probability
/// `efficiency` (one joint draw, fair sampling); a detected pair then falls into
/// an outcome bin drawn by inverse CDF from noisy_probability.
inline CoincidenceCounts sample_counts(const PhaseSetting& setting, const NoiseModel& noise, std::uint64_t trials,
                                       std::uint64_t seed) {
  noise.validate();
  if (trials == 0) throw ValidationError("trials must be positive");
  const auto outcomes = experiment::all_outcomes(setting.kind());
  std::vector<double> cdf;
  double acc = 0.0;
  for (const Outcome& o : outcomes) cdf.push_back(acc += noisy_probability(o, setting, noise));

  CoincidenceCounts out{setting, std::vector<std::uint64_t>(outcomes.size(), 0), trials, 0, seed};
  Generator rng(seed);
  for (std::uint64_t t = 0; t < trials; ++t) {
    if (rng.uniform() >= noise.efficiency) continue;
    const double u = rng.uniform() * acc;
    std::size_t k = 0;
    while (k + 1 < cdf.size() && u >= cdf[k]) ++k;
    ++out.counts[k];
    ++out.detected;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Estimators

struct CorrelationEstimate {
  double value = 0.0;
  double sigma = 0.0;
  std::uint64_t n = 0;
  PhaseSetting setting;
};

/// Multinomial standard error of a ±1 mean: sqrt((1 - E^2) / n).
inline double correlation_sigma(double e, std::uint64_t n) {
  if (n == 0) throw EstimationError("no events");
  return std::sqrt(std::max(0.0, 1.0 - e * e) / static_cast<double>(n));
}

/// Experiment 1 with only the four A = +1 detectors registered. Beam-splitter
/// symmetry gives P(A = +1) = 1/2, so P(1,B,C) is estimated as n(1,B,C)/(2n)
/// with n the four-detector total, and E = 2 sum_{B,C} BC P(1,B,C).
inline CorrelationEstimate estimate_correlation_exp1(const CoincidenceCounts& counts) {
  if (counts.kind() != Kind::Ghz) throw StructuralError("experiment 1 estimator needs three-outcome counts");
  counts.validate();
  const auto outcomes = experiment::all_outcomes(Kind::Ghz);
  std::uint64_t n = 0;
  std::int64_t signed_sum = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].a != experiment::Sign::Plus) continue;
    const auto c = counts.counts[i];
    n += c;
    signed_sum += experiment::value(outcomes[i].b) * experiment::value(*outcomes[i].c) * static_cast<std::int64_t>(c);
  }
  if (n == 0) throw EstimationError("no events registered at the A = +1 detectors");
  const double bc_weighted = static_cast<double>(signed_sum) / (2.0 * static_cast<double>(n));
  const double e = 2.0 * bc_weighted;
  return {e, correlation_sigma(e, n), n, counts.setting};
}

/// Experiment 2: E = sum AB n(A,B) / sum n(A,B) over trigger-conditioned counts.
inline CorrelationEstimate estimate_correlation_exp2(const CoincidenceCounts& counts) {
  if (counts.kind() != Kind::EventReady) throw StructuralError("experiment 2 estimator needs two-outcome counts");
  counts.validate();
  const auto outcomes = experiment::all_outcomes(Kind::EventReady);
  std::uint64_t n = 0;
  std::int64_t signed_sum = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    n += counts.counts[i];
    signed_sum += outcomes[i].product() * static_cast<std::int64_t>(counts.counts[i]);
  }
  if (n == 0) throw EstimationError("no conditioned events");
  const double e = static_cast<double>(signed_sum) / static_cast<double>(n);
  return {e, correlation_sigma(e, n), n, counts.setting};
}

inline CorrelationEstimate estimate_correlation(const CoincidenceCounts& counts) {
  return counts.kind() == Kind::Ghz ? estimate_correlation_exp1(counts) : estimate_correlation_exp2(counts);
}

struct Combined {
  double value;
  double sigma;
};

/// Signed sum of independent estimates with errors added in quadrature.
inline Combined propagate_error(const std::vector<std::pair<double, double>>& values, const std::vector<int>& signs) {
  if (values.size() != signs.size()) throw ValidationError("values and signs differ in length");
  double sum = 0.0;
  double var = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (signs[i] != 1 && signs[i] != -1) throw ValidationError("signs must be +1 or -1");
    if (!(values[i].second >= 0.0)) throw ValidationError("sigmas must be nonnegative");
    sum += signs[i] * values[i].first;
    var += values[i].second * values[i].second;
  }
  return {sum, std::sqrt(var)};
}

}  // namespace ncsim::montecarlo
