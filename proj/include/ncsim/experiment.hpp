#pragma once

// The two optical setups: the two-photon pseudo-GHZ arrangement (experiment 1)
// and the event-ready single-photon arrangement (experiment 2).
//
// Experiment 1 lives in the space (path1, pol1, pol2); the path slot has
// alphabet {u, d}, the exit beams of the polarizing beam splitter. Experiment 2
// lives in (pol1, path1) with alphabet {b, a}; b is reached by V and a by H,
// matching u and d of experiment 1 position for position.

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "ncsim/error.hpp"
#include "ncsim/hilbert.hpp"

namespace ncsim::experiment {

using hilbert::Complex;
using hilbert::Slot;
using hilbert::Space;
using hilbert::StateVector;

inline constexpr double kPi = std::numbers::pi;

enum class Sign : int { Minus = -1, Plus = 1 };

constexpr int value(Sign s) noexcept { return static_cast<int>(s); }

inline Sign sign_from_int(int v) {
  if (v == 1) return Sign::Plus;
  if (v == -1) return Sign::Minus;
  throw ValidationError("dichotomic outcome must be +1 or -1, got " + std::to_string(v));
}

inline constexpr std::array<Sign, 2> kSigns{Sign::Plus, Sign::Minus};

enum class Kind { Ghz, EventReady };

inline std::string to_string(Kind k) { return k == Kind::Ghz ? "exp1" : "exp2"; }

/// Wraps an angle into [-pi, pi).
inline double canonical_phase(double radians) {
  if (!std::isfinite(radians)) throw ValidationError("phase must be finite");
  double r = std::fmod(radians + kPi, 2.0 * kPi);
  if (r < 0.0) r += 2.0 * kPi;
  r -= kPi;
  return r >= kPi ? -kPi : r;
}

/// Phases in radians. phi_c is absent for the event-ready experiment.
struct PhaseSetting {
  double phi_a = 0.0;
  double phi_b = 0.0;
  std::optional<double> phi_c;

  static PhaseSetting ghz(double a, double b, double c) { return check({a, b, c}); }
  static PhaseSetting event_ready(double a, double b) { return check({a, b, std::nullopt}); }

  Kind kind() const noexcept { return phi_c ? Kind::Ghz : Kind::EventReady; }

  double total() const noexcept { return phi_a + phi_b + phi_c.value_or(0.0); }

  PhaseSetting canonical() const {
    PhaseSetting s{canonical_phase(phi_a), canonical_phase(phi_b), std::nullopt};
    if (phi_c) s.phi_c = canonical_phase(*phi_c);
    return s;
  }

  friend bool operator==(const PhaseSetting&, const PhaseSetting&) = default;

 private:
  static PhaseSetting check(PhaseSetting s) {
    if (!std::isfinite(s.phi_a) || !std::isfinite(s.phi_b) || (s.phi_c && !std::isfinite(*s.phi_c))) {
      throw ValidationError("phase settings must be finite");
    }
    return s;
  }
};

struct Outcome {
  Sign a = Sign::Plus;
  Sign b = Sign::Plus;
  std::optional<Sign> c;

  int product() const noexcept { return value(a) * value(b) * (c ? value(*c) : 1); }

  friend bool operator==(const Outcome&, const Outcome&) = default;
};

/// All joint outcomes of an experiment in a fixed order: a, then b, then c,
/// each running +1 before -1.
inline std::vector<Outcome> all_outcomes(Kind kind) {
  std::vector<Outcome> out;
  for (Sign a : kSigns) {
    for (Sign b : kSigns) {
      if (kind == Kind::EventReady) {
        out.push_back({a, b, std::nullopt});
        continue;
      }
      for (Sign c : kSigns) out.push_back({a, b, c});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Slots

inline Slot ghz_path_slot() { return {"path1", {'u', 'd'}}; }
inline Slot event_ready_path_slot() { return {"path1", {'b', 'a'}}; }
inline Slot pol1_slot() { return {"pol1", {'H', 'V'}}; }
inline Slot pol2_slot() { return {"pol2", {'H', 'V'}}; }

inline Space ghz_space() { return {ghz_path_slot(), pol1_slot(), pol2_slot()}; }
inline Space event_ready_space() { return {pol1_slot(), event_ready_path_slot()}; }

// ---------------------------------------------------------------------------
// Observables

enum class ObservableKind { PathA, PolarizationB, PolarizationC };

/// A ±1-valued measurement given by its two orthonormal eigenstates.
struct DichotomicObservable {
  ObservableKind kind;
  double phase;
  StateVector plus_eigenstate;
  StateVector minus_eigenstate;

  const StateVector& eigenstate(Sign s) const noexcept {
    return s == Sign::Plus ? plus_eigenstate : minus_eigenstate;
  }
};

/// (i|d> ± e^{i phi}|u>)/sqrt2 on a path slot; alphabet[0] plays u, alphabet[1] plays d.
inline StateVector eigenstate_A(double phase, Sign sign, const Slot& path = ghz_path_slot()) {
  const double h = 1.0 / std::numbers::sqrt2;
  const Complex rotated = static_cast<double>(value(sign)) * std::polar(1.0, phase);
  return StateVector(Space{path}, {h * rotated, h * Complex{0.0, 1.0}});
}

/// (|H> ± e^{i phi}|V>)/sqrt2 on photon 1's polarization.
inline StateVector eigenstate_B(double phase, Sign sign) {
  const double h = 1.0 / std::numbers::sqrt2;
  return StateVector(Space{pol1_slot()},
                     {Complex{h, 0.0}, h * static_cast<double>(value(sign)) * std::polar(1.0, phase)});
}

/// (|V> ± e^{i phi}|H>)/sqrt2 on photon 2's polarization. Note the V/H order is
/// the reverse of B.
inline StateVector eigenstate_C(double phase, Sign sign) {
  const double h = 1.0 / std::numbers::sqrt2;
  return StateVector(Space{pol2_slot()},
                     {h * static_cast<double>(value(sign)) * std::polar(1.0, phase), Complex{h, 0.0}});
}

inline DichotomicObservable observable_A(double phase, const Slot& path = ghz_path_slot()) {
  return {ObservableKind::PathA, phase, eigenstate_A(phase, Sign::Plus, path),
          eigenstate_A(phase, Sign::Minus, path)};
}

inline DichotomicObservable observable_B(double phase) {
  return {ObservableKind::PolarizationB, phase, eigenstate_B(phase, Sign::Plus),
          eigenstate_B(phase, Sign::Minus)};
}

inline DichotomicObservable observable_C(double phase) {
  return {ObservableKind::PolarizationC, phase, eigenstate_C(phase, Sign::Plus),
          eigenstate_C(phase, Sign::Minus)};
}

// ---------------------------------------------------------------------------
// Experiment 1

/// (|V>_1|H>_2 + |H>_1|V>_2)/sqrt2 over (pol1, pol2). The spatial modes l, r
/// are fixed and carry no slot.
inline StateVector prepare_initial() {
  const double h = 1.0 / std::numbers::sqrt2;
  return StateVector::from_terms(Space{pol1_slot(), pol2_slot()}, {{"VH", h}, {"HV", h}});
}

/// Routes photon 1 through the polarizing beam splitter: H exits into d, V into u.
inline StateVector apply_pbs(const StateVector& state) {
  if (!(state.space() == Space{pol1_slot(), pol2_slot()})) {
    throw StructuralError("apply_pbs expects a state over (pol1, pol2)");
  }
  std::vector<Complex> amps(8);
  const Space out = ghz_space();
  for (char p2 : {'H', 'V'}) {
    amps[out.index_of(std::string{'u', 'V', p2})] = state.amplitude(std::string{'V', p2});
    amps[out.index_of(std::string{'d', 'H', p2})] = state.amplitude(std::string{'H', p2});
  }
  return StateVector(out, std::move(amps));
}

/// (|u,V,H> + |d,H,V>)/sqrt2 over (path1, pol1, pol2).
inline StateVector prepare_ghz() { return apply_pbs(prepare_initial()); }

inline StateVector joint_eigenstate(const Outcome& outcome, const PhaseSetting& setting) {
  if (!outcome.c || !setting.phi_c) throw StructuralError("experiment 1 needs three outcomes and phases");
  return hilbert::tensor(hilbert::tensor(eigenstate_A(setting.phi_a, outcome.a), eigenstate_B(setting.phi_b, outcome.b)),
                         eigenstate_C(*setting.phi_c, *outcome.c));
}

/// (1/8)(1 + ABC sin(phi_a + phi_b + phi_c)).
inline double joint_probability(const Outcome& outcome, const PhaseSetting& setting) {
  if (!outcome.c || !setting.phi_c) throw StructuralError("experiment 1 needs three outcomes and phases");
  return (1.0 + outcome.product() * std::sin(setting.total())) / 8.0;
}

/// Same quantity via projection of the prepared state.
inline double joint_probability_projected(const Outcome& outcome, const PhaseSetting& setting) {
  static const StateVector psi = prepare_ghz();
  return hilbert::probability(joint_eigenstate(outcome, setting), psi);
}

inline double correlation_qm3(const PhaseSetting& setting) {
  if (!setting.phi_c) throw StructuralError("correlation_qm3 needs phi_c");
  return std::sin(setting.total());
}

/// <psi|A B C|psi> summed over projectors.
inline double correlation_qm3_projected(const PhaseSetting& setting) {
  double e = 0.0;
  for (const Outcome& o : all_outcomes(Kind::Ghz)) e += o.product() * joint_probability_projected(o, setting);
  return e;
}

// ---------------------------------------------------------------------------
// Experiment 2

/// (|V>|b> + |H>|a>)/sqrt2 over (pol1, path1).
inline StateVector eventready_state() {
  const double h = 1.0 / std::numbers::sqrt2;
  return StateVector::from_terms(event_ready_space(), {{"Vb", h}, {"Ha", h}});
}

/// Photon 1's state after the trigger fires at C = +1, phi_c = 0, obtained by
/// conditioning the full two-photon state and mapping u -> b, d -> a.
inline StateVector conditional_eventready_state() {
  const StateVector conditioned = hilbert::project_slot(prepare_ghz(), eigenstate_C(0.0, Sign::Plus)).normalized();
  return hilbert::relabel(hilbert::reorder(conditioned, {"pol1", "path1"}), event_ready_path_slot());
}

inline StateVector pair_eigenstate(Sign a, Sign b, double phi_a, double phi_b) {
  return hilbert::tensor(eigenstate_B(phi_b, b), eigenstate_A(phi_a, a, event_ready_path_slot()));
}

/// (1/4)(1 + AB sin(phi_a + phi_b)).
inline double pair_probability(Sign a, Sign b, double phi_a, double phi_b) {
  return (1.0 + value(a) * value(b) * std::sin(phi_a + phi_b)) / 4.0;
}

inline double pair_probability_projected(Sign a, Sign b, double phi_a, double phi_b) {
  static const StateVector psi = eventready_state();
  return hilbert::probability(pair_eigenstate(a, b, phi_a, phi_b), psi);
}

inline double correlation_qm2(double phi_a, double phi_b) { return std::sin(phi_a + phi_b); }

inline double correlation_qm2_projected(double phi_a, double phi_b) {
  double e = 0.0;
  for (Sign a : kSigns) {
    for (Sign b : kSigns) e += value(a) * value(b) * pair_probability_projected(a, b, phi_a, phi_b);
  }
  return e;
}

/// Ideal outcome probability for either experiment, dispatched on the setting.
inline double ideal_probability(const Outcome& outcome, const PhaseSetting& setting) {
  if (setting.kind() == Kind::Ghz) return joint_probability(outcome, setting);
  if (outcome.c) throw StructuralError("experiment 2 outcomes have no c component");
  return pair_probability(outcome.a, outcome.b, setting.phi_a, setting.phi_b);
}

inline double ideal_correlation(const PhaseSetting& setting) {
  return setting.kind() == Kind::Ghz ? correlation_qm3(setting) : correlation_qm2(setting.phi_a, setting.phi_b);
}

}  // namespace ncsim::experiment
