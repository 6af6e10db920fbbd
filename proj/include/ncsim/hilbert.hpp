#pragma once

// Dense state vectors over small tensor products of two-level slots.
//
// A Space is an ordered list of slots; each slot has a name (e.g. "path1",
// "pol2") and a two-letter alphabet (e.g. {'u','d'} or {'H','V'}). Basis
// labels are strings with one letter per slot, in slot order, so "uVH" in the
// space (path1, pol1, pol2) is |u>_1 |V>_1 |H>_2. Slot 0 is the most
// significant bit of the dense amplitude index.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ncsim/error.hpp"

namespace ncsim::hilbert {

using Complex = std::complex<double>;

/// Absolute tolerance used for exact-math assertions on dimension <= 8 algebra.
inline constexpr double kTolerance = 1e-12;

/// Largest supported number of slots (dimension 2^3 = 8).
inline constexpr std::size_t kMaxSlots = 3;

struct Slot {
  std::string name;
  std::array<char, 2> alphabet;

  /// 0 or 1 for a letter of this slot's alphabet, -1 otherwise.
  int position(char letter) const noexcept {
    if (letter == alphabet[0]) return 0;
    if (letter == alphabet[1]) return 1;
    return -1;
  }

  friend bool operator==(const Slot&, const Slot&) = default;
};

using BasisLabel = std::string;

class Space {
 public:
  Space() = default;

  explicit Space(std::vector<Slot> slots) : slots_(std::move(slots)) {
    if (slots_.size() > kMaxSlots) {
      throw StructuralError("space has " + std::to_string(slots_.size()) + " slots; at most " +
                            std::to_string(kMaxSlots) + " are supported");
    }
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      if (slots_[i].alphabet[0] == slots_[i].alphabet[1]) {
        throw StructuralError("slot '" + slots_[i].name + "' has a degenerate alphabet");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (slots_[i].name == slots_[j].name) {
          throw StructuralError("duplicate slot '" + slots_[i].name + "'");
        }
      }
    }
  }

  Space(std::initializer_list<Slot> slots) : Space(std::vector<Slot>(slots)) {}

  std::size_t arity() const noexcept { return slots_.size(); }
  std::size_t dimension() const noexcept { return std::size_t{1} << slots_.size(); }
  const std::vector<Slot>& slots() const noexcept { return slots_; }
  const Slot& slot(std::size_t i) const { return slots_.at(i); }

  /// Position of the slot called `name`, or arity() if absent.
  std::size_t find(std::string_view name) const noexcept {
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      if (slots_[i].name == name) return i;
    }
    return slots_.size();
  }

  std::size_t index_of(std::string_view label) const {
    if (label.size() != slots_.size()) {
      throw StructuralError("basis label '" + std::string(label) + "' has " +
                            std::to_string(label.size()) + " factors; space has " +
                            std::to_string(slots_.size()) + " slots");
    }
    std::size_t index = 0;
    for (std::size_t k = 0; k < slots_.size(); ++k) {
      const int bit = slots_[k].position(label[k]);
      if (bit < 0) {
        throw StructuralError("'" + std::string(1, label[k]) + "' is not in the alphabet of slot '" +
                              slots_[k].name + "'");
      }
      index = (index << 1) | static_cast<std::size_t>(bit);
    }
    return index;
  }

  BasisLabel label_of(std::size_t index) const {
    BasisLabel label(slots_.size(), '?');
    for (std::size_t k = slots_.size(); k-- > 0;) {
      label[k] = slots_[k].alphabet[index & 1u];
      index >>= 1;
    }
    return label;
  }

  friend bool operator==(const Space&, const Space&) = default;

 private:
  std::vector<Slot> slots_;
};

class StateVector {
 public:
  StateVector(Space space, std::vector<Complex> amplitudes)
      : space_(std::move(space)), amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() != space_.dimension()) {
      throw StructuralError("expected " + std::to_string(space_.dimension()) + " amplitudes, got " +
                            std::to_string(amplitudes_.size()));
    }
    for (const Complex& z : amplitudes_) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        throw ValidationError("non-finite amplitude");
      }
    }
  }

  /// Superposition of basis kets, e.g. {{"HV", 1}, {"VH", 1}}. Repeated labels add.
  static StateVector from_terms(Space space,
                                std::initializer_list<std::pair<std::string_view, Complex>> terms) {
    std::vector<Complex> amps(space.dimension());
    for (const auto& [label, amplitude] : terms) amps[space.index_of(label)] += amplitude;
    return StateVector(std::move(space), std::move(amps));
  }

  static StateVector basis(Space space, std::string_view label) {
    return from_terms(std::move(space), {{label, Complex{1.0, 0.0}}});
  }

  const Space& space() const noexcept { return space_; }
  std::span<const Complex> amplitudes() const noexcept { return amplitudes_; }
  std::size_t dimension() const noexcept { return amplitudes_.size(); }

  Complex amplitude(std::string_view label) const { return amplitudes_[space_.index_of(label)]; }
  Complex operator[](std::size_t i) const { return amplitudes_.at(i); }

  double squared_norm() const noexcept {
    double s = 0.0;
    for (const Complex& z : amplitudes_) s += std::norm(z);
    return s;
  }

  double norm() const noexcept { return std::sqrt(squared_norm()); }

  StateVector normalized() const {
    const double n = norm();
    if (n == 0.0) throw ValidationError("cannot normalize the zero vector");
    StateVector out = *this;
    for (Complex& z : out.amplitudes_) z /= n;
    return out;
  }

  StateVector scaled(Complex factor) const {
    StateVector out = *this;
    for (Complex& z : out.amplitudes_) z *= factor;
    return out;
  }

 private:
  Space space_;
  std::vector<Complex> amplitudes_;
};

/// u ⊗ v, with u's slots first.
inline StateVector tensor(const StateVector& u, const StateVector& v) {
  for (const Slot& s : v.space().slots()) {
    if (u.space().find(s.name) != u.space().arity()) {
      throw StructuralError("tensor: slot '" + s.name + "' appears in both factors");
    }
  }
  std::vector<Slot> slots = u.space().slots();
  slots.insert(slots.end(), v.space().slots().begin(), v.space().slots().end());
  Space space(std::move(slots));

  std::vector<Complex> amps;
  amps.reserve(space.dimension());
  for (const Complex& a : u.amplitudes()) {
    for (const Complex& b : v.amplitudes()) amps.push_back(a * b);
  }
  return StateVector(std::move(space), std::move(amps));
}

/// <u|v>, conjugate-linear in u.
inline Complex inner(const StateVector& u, const StateVector& v) {
  if (!(u.space() == v.space())) throw StructuralError("inner: tensor structures differ");
  Complex sum{0.0, 0.0};
  for (std::size_t i = 0; i < u.dimension(); ++i) sum += std::conj(u[i]) * v[i];
  return sum;
}

/// |<eigenstate|state>|^2.
inline double probability(const StateVector& eigenstate, const StateVector& state) {
  return std::norm(inner(eigenstate, state));
}

/// Partial inner product <factor|_slot |state>: contracts the single slot that
/// `factor` lives on and returns the (unnormalized) state on the remaining slots.
inline StateVector project_slot(const StateVector& state, const StateVector& factor) {
  if (factor.space().arity() != 1) throw StructuralError("project_slot: factor must be a single slot");
  const Slot& target = factor.space().slot(0);
  const std::size_t k = state.space().find(target.name);
  if (k == state.space().arity()) {
    throw StructuralError("project_slot: state has no slot '" + target.name + "'");
  }
  if (!(state.space().slot(k) == target)) {
    throw StructuralError("project_slot: alphabet mismatch on slot '" + target.name + "'");
  }

  std::vector<Slot> rest;
  for (std::size_t i = 0; i < state.space().arity(); ++i) {
    if (i != k) rest.push_back(state.space().slot(i));
  }
  Space out_space(std::move(rest));
  std::vector<Complex> amps(out_space.dimension());
  for (std::size_t i = 0; i < state.dimension(); ++i) {
    const BasisLabel label = state.space().label_of(i);
    BasisLabel reduced = label;
    reduced.erase(k, 1);
    amps[out_space.index_of(reduced)] += std::conj(factor[static_cast<std::size_t>(target.position(label[k]))]) * state[i];
  }
  return StateVector(std::move(out_space), std::move(amps));
}

/// The same state with its slots permuted into `order` (given by slot name).
inline StateVector reorder(const StateVector& state, const std::vector<std::string>& order) {
  const Space& from = state.space();
  if (order.size() != from.arity()) throw StructuralError("reorder: slot count mismatch");
  std::vector<std::size_t> source;
  std::vector<Slot> slots;
  for (const std::string& name : order) {
    const std::size_t k = from.find(name);
    if (k == from.arity()) throw StructuralError("reorder: unknown slot '" + name + "'");
    source.push_back(k);
    slots.push_back(from.slot(k));
  }
  Space to(std::move(slots));
  std::vector<Complex> amps(to.dimension());
  for (std::size_t i = 0; i < state.dimension(); ++i) {
    const BasisLabel label = from.label_of(i);
    BasisLabel permuted(label.size(), '?');
    for (std::size_t j = 0; j < source.size(); ++j) permuted[j] = label[source[j]];
    amps[to.index_of(permuted)] = state[i];
  }
  return StateVector(std::move(to), std::move(amps));
}

/// Replace the slot named `replacement.name` by `replacement`, mapping letters
/// position-wise (alphabet[0] -> alphabet[0], alphabet[1] -> alphabet[1]).
inline StateVector relabel(const StateVector& state, const Slot& replacement) {
  std::vector<Slot> slots = state.space().slots();
  const std::size_t k = state.space().find(replacement.name);
  if (k == slots.size()) throw StructuralError("relabel: unknown slot '" + replacement.name + "'");
  slots[k] = replacement;
  std::vector<Complex> amps(state.amplitudes().begin(), state.amplitudes().end());
  return StateVector(Space(std::move(slots)), std::move(amps));
}

/// Largest componentwise distance; spaces must match.
inline double max_abs_difference(const StateVector& u, const StateVector& v) {
  if (!(u.space() == v.space())) throw StructuralError("max_abs_difference: tensor structures differ");
  double d = 0.0;
  for (std::size_t i = 0; i < u.dimension(); ++i) d = std::max(d, std::abs(u[i] - v[i]));
  return d;
}

}  // namespace ncsim::hilbert
