#pragma once

// Noncontextual hidden-variable models over a finite grid of measured phases.
//
// A HiddenAssignment fixes, for one run, a ±1 value for every (observable,
// phase) pair on the grid; the value of an observable may depend on its own
// phase only. Ensembles mix assignments. Because every ensemble correlation is
// a convex combination of deterministic ones, linear expressions in the
// correlations are extremal on single assignments, and classical_bound finds
// that extremum by exhaustive enumeration.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ncsim/error.hpp"
#include "ncsim/experiment.hpp"

namespace ncsim::nchv {

inline constexpr double kClassicalBound = 2.0;
inline constexpr double kQuantumChshMax = 2.0 * std::numbers::sqrt2;
inline constexpr double kQuantumMerminMax = 4.0;

/// Detection efficiency quoted for perfect visibility. Reported, not derived.
inline constexpr double kCitedEfficiencyThreshold = std::numbers::sqrt2 / 2.0;

/// Largest number of binary degrees of freedom classical_bound will enumerate.
inline constexpr std::size_t kMaxEnumerationBits = 24;

/// Slack allowed on noisy correlation inputs to the inequality combinations.
inline constexpr double kCorrelationSlack = 0.05;

/// Allowed phases per observable (A, B and optionally C), in radians.
class PhaseGrid {
 public:
  explicit PhaseGrid(std::vector<std::vector<double>> phases) : phases_(std::move(phases)) {
    if (phases_.size() < 2 || phases_.size() > 3) {
      throw ValidationError("a phase grid covers two or three observables");
    }
    for (const auto& list : phases_) {
      if (list.empty()) throw ValidationError("phase grid lists must be non-empty");
      for (std::size_t i = 0; i < list.size(); ++i) {
        if (!std::isfinite(list[i])) throw ValidationError("phase grid entries must be finite");
        for (std::size_t j = 0; j < i; ++j) {
          if (list[i] == list[j]) throw ValidationError("phase grid entries must be distinct");
        }
      }
    }
  }

  std::size_t observables() const noexcept { return phases_.size(); }
  const std::vector<double>& phases(std::size_t observable) const { return phases_.at(observable); }

  std::size_t points() const noexcept {
    std::size_t n = 0;
    for (const auto& list : phases_) n += list.size();
    return n;
  }

  void check_indices(std::span<const std::size_t> indices) const {
    if (indices.size() != phases_.size()) {
      throw ValidationError("expected " + std::to_string(phases_.size()) + " phase indices, got " +
                            std::to_string(indices.size()));
    }
    for (std::size_t k = 0; k < indices.size(); ++k) {
      if (indices[k] >= phases_[k].size()) {
        throw ValidationError("phase index " + std::to_string(indices[k]) + " out of range for observable " +
                              std::to_string(k));
      }
    }
  }

 private:
  std::vector<std::vector<double>> phases_;
};

/// Predetermined ±1 values for one run, shaped like its grid.
class HiddenAssignment {
 public:
  HiddenAssignment(const PhaseGrid& grid, std::vector<std::vector<int>> values) : values_(std::move(values)) {
    if (values_.size() != grid.observables()) throw ValidationError("assignment does not cover every observable");
    for (std::size_t k = 0; k < values_.size(); ++k) {
      if (values_[k].size() != grid.phases(k).size()) {
        throw ValidationError("assignment does not cover every phase of observable " + std::to_string(k));
      }
      for (int v : values_[k]) {
        if (v != 1 && v != -1) throw ValidationError("assigned values must be +1 or -1");
      }
    }
  }

  /// Bit j (grid points in observable-major order) set means value -1.
  static HiddenAssignment from_bits(const PhaseGrid& grid, std::uint64_t bits) {
    std::vector<std::vector<int>> values(grid.observables());
    std::size_t j = 0;
    for (std::size_t k = 0; k < grid.observables(); ++k) {
      for (std::size_t i = 0; i < grid.phases(k).size(); ++i, ++j) {
        values[k].push_back(((bits >> j) & 1u) ? -1 : 1);
      }
    }
    return HiddenAssignment(grid, std::move(values));
  }

  int value(std::size_t observable, std::size_t phase_index) const {
    return values_.at(observable).at(phase_index);
  }

  int product(std::span<const std::size_t> indices) const {
    int p = 1;
    for (std::size_t k = 0; k < indices.size(); ++k) p *= values_[k][indices[k]];
    return p;
  }

 private:
  std::vector<std::vector<int>> values_;
};

class Ensemble {
 public:
  struct Member {
    HiddenAssignment assignment;
    double weight;
  };

  static Ensemble weighted(std::vector<Member> members) {
    if (members.empty()) throw ValidationError("ensemble must not be empty");
    double total = 0.0;
    for (const Member& m : members) {
      if (!(m.weight >= 0.0)) throw ValidationError("ensemble weights must be nonnegative");
      total += m.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ValidationError("ensemble weights must sum to 1");
    return Ensemble(std::move(members));
  }

  /// One entry per run, each with weight 1/N.
  static Ensemble runs(std::vector<HiddenAssignment> runs) {
    if (runs.empty()) throw ValidationError("ensemble must not be empty");
    const double w = 1.0 / static_cast<double>(runs.size());
    std::vector<Member> members;
    members.reserve(runs.size());
    for (auto& r : runs) members.push_back({std::move(r), w});
    return Ensemble(std::move(members));
  }

  const std::vector<Member>& members() const noexcept { return members_; }

 private:
  explicit Ensemble(std::vector<Member> members) : members_(std::move(members)) {}
  std::vector<Member> members_;
};

/// Weighted average of the product of the assigned values at `indices`.
inline double correlation(const Ensemble& ensemble, const PhaseGrid& grid, std::span<const std::size_t> indices) {
  grid.check_indices(indices);
  double e = 0.0;
  for (const auto& m : ensemble.members()) e += m.weight * m.assignment.product(indices);
  return e;
}

inline double correlation_nchv3(const Ensemble& ensemble, const PhaseGrid& grid,
                                const std::array<std::size_t, 3>& indices) {
  return correlation(ensemble, grid, indices);
}

inline double correlation_nchv2(const Ensemble& ensemble, const PhaseGrid& grid,
                                const std::array<std::size_t, 2>& indices) {
  return correlation(ensemble, grid, indices);
}

// ---------------------------------------------------------------------------
// Linear expressions in correlations

struct Term {
  int sign;
  std::vector<std::size_t> indices;
};

using Expression = std::vector<Term>;

/// Grid A = {phi_a, phi_a'}, B = {0, pi/2}.
inline PhaseGrid chsh_grid(double phi_a, double phi_a_prime) {
  return PhaseGrid({{phi_a, phi_a_prime}, {0.0, experiment::kPi / 2}});
}

/// E(a,0) + E(a,pi/2) + E(a',pi/2) - E(a',0) on chsh_grid.
inline Expression chsh_expression() { return {{+1, {0, 0}}, {+1, {0, 1}}, {+1, {1, 1}}, {-1, {1, 0}}}; }

/// Grid A = {phi_a, phi_a'}, B = C = {0, pi/2}.
inline PhaseGrid mermin_grid(double phi_a, double phi_a_prime) {
  return PhaseGrid({{phi_a, phi_a_prime}, {0.0, experiment::kPi / 2}, {0.0, experiment::kPi / 2}});
}

/// E(a,pi/2,pi/2) - E(a,0,0) - E(a',pi/2,0) - E(a',0,pi/2) on mermin_grid.
inline Expression mermin_expression() {
  return {{+1, {0, 1, 1}}, {-1, {0, 0, 0}}, {-1, {1, 1, 0}}, {-1, {1, 0, 1}}};
}

inline double evaluate(const Expression& expression, const std::function<double(std::span<const std::size_t>)>& e) {
  double s = 0.0;
  for (const Term& t : expression) s += t.sign * e(t.indices);
  return s;
}

inline double evaluate(const Expression& expression, const HiddenAssignment& assignment) {
  double s = 0.0;
  for (const Term& t : expression) s += t.sign * assignment.product(t.indices);
  return s;
}

inline double evaluate(const Expression& expression, const Ensemble& ensemble, const PhaseGrid& grid) {
  return evaluate(expression, [&](std::span<const std::size_t> idx) { return correlation(ensemble, grid, idx); });
}

struct Extrema {
  double min;
  double max;
  std::uint64_t assignments;
};

/// Minimum and maximum of `expression` over every deterministic assignment on `grid`.
inline Extrema classical_extrema(const Expression& expression, const PhaseGrid& grid) {
  const std::size_t bits = grid.points();
  if (bits > kMaxEnumerationBits) {
    throw ValidationError("grid has " + std::to_string(bits) + " binary degrees of freedom; enumeration is limited to " +
                          std::to_string(kMaxEnumerationBits));
  }
  for (const Term& t : expression) {
    if (t.sign != 1 && t.sign != -1) throw ValidationError("expression term signs must be +1 or -1");
    grid.check_indices(t.indices);
  }

  // Flat bit offset of each observable's first phase.
  std::vector<std::size_t> offset(grid.observables(), 0);
  for (std::size_t k = 1; k < grid.observables(); ++k) offset[k] = offset[k - 1] + grid.phases(k - 1).size();

  const std::uint64_t count = std::uint64_t{1} << bits;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    int s = 0;
    for (const Term& t : expression) {
      unsigned parity = 0;
      for (std::size_t k = 0; k < t.indices.size(); ++k) parity ^= (mask >> (offset[k] + t.indices[k])) & 1u;
      s += parity ? -t.sign : t.sign;
    }
    lo = std::min(lo, static_cast<double>(s));
    hi = std::max(hi, static_cast<double>(s));
  }
  return {lo, hi, count};
}

inline double classical_bound(const Expression& expression, const PhaseGrid& grid) {
  return classical_extrema(expression, grid).max;
}

// ---------------------------------------------------------------------------
// The GHZ argument

namespace detail {
inline void require_unit(int v, const char* what) {
  if (v != 1 && v != -1) throw ValidationError(std::string(what) + " must be +1 or -1");
}

inline void require_correlation(double e, double slack) {
  if (!std::isfinite(e) || std::abs(e) > 1.0 + slack) {
    throw ValidationError("correlation value " + std::to_string(e) + " outside [-1, 1]");
  }
}
}  // namespace detail

/// Given the values of a(0)b(0)c(pi/2), a(0)b(pi/2)c(0) and a(pi/2)b(0)c(0),
/// the product a(pi/2)b(pi/2)c(pi/2) is their product: every other factor
/// appears squared.
inline int ghz_forcing(int c1, int c2, int c3) {
  detail::require_unit(c1, "first constraint");
  detail::require_unit(c2, "second constraint");
  detail::require_unit(c3, "third constraint");
  return c1 * c2 * c3;
}

struct ForcingEnumeration {
  std::size_t consistent = 0;   // assignments meeting all three constraints
  std::set<int> products;       // values of a(pi/2)b(pi/2)c(pi/2) among them
};

/// Brute force over all 2^6 assignments on the {0, pi/2}^3 grid.
inline ForcingEnumeration ghz_forcing_enumerated(int c1, int c2, int c3) {
  detail::require_unit(c1, "first constraint");
  detail::require_unit(c2, "second constraint");
  detail::require_unit(c3, "third constraint");
  const PhaseGrid grid({{0.0, experiment::kPi / 2}, {0.0, experiment::kPi / 2}, {0.0, experiment::kPi / 2}});
  using Idx = std::array<std::size_t, 3>;
  ForcingEnumeration result;
  for (std::uint64_t bits = 0; bits < 64; ++bits) {
    const auto h = HiddenAssignment::from_bits(grid, bits);
    if (h.product(Idx{0, 0, 1}) == c1 && h.product(Idx{0, 1, 0}) == c2 && h.product(Idx{1, 0, 0}) == c3) {
      ++result.consistent;
      result.products.insert(h.product(Idx{1, 1, 1}));
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Inequality combinations

inline double chsh_value(double e1, double e2, double e3, double e4) {
  for (double e : {e1, e2, e3, e4}) detail::require_correlation(e, kCorrelationSlack);
  return e1 + e2 + e3 - e4;
}

inline double mermin_value(double e1, double e2, double e3, double e4) {
  for (double e : {e1, e2, e3, e4}) detail::require_correlation(e, kCorrelationSlack);
  return e1 - e2 - e3 - e4;
}

struct BoundEstimate {
  double bound;
  double sigma;
};

/// Lower bound on E(a,pi/2,pi/2) implied by the Mermin-type inequality once
/// E(a,0,0), E(a',pi/2,0) and E(a',0,pi/2) are known.
inline BoundEstimate nchv_lower_bound(double e_a, double e_b, double e_c, const std::array<double, 3>& sigmas) {
  for (double e : {e_a, e_b, e_c}) detail::require_correlation(e, 0.0);
  double var = 0.0;
  for (double s : sigmas) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ValidationError("sigmas must be finite and nonnegative");
    var += s * s;
  }
  return {e_a + e_b + e_c - kClassicalBound, std::sqrt(var)};
}

}  // namespace ncsim::nchv
