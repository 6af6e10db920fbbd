#include "ncsim/nchv.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "ncsim/experiment.hpp"

using namespace ncsim;
using namespace ncsim::nchv;
using experiment::kPi;

namespace {

using Phases = std::vector<std::vector<double>>;

PhaseGrid cube_grid() { return PhaseGrid({{0.0, kPi / 2}, {0.0, kPi / 2}, {0.0, kPi / 2}}); }

HiddenAssignment with_minus(const PhaseGrid& g, std::initializer_list<std::pair<std::size_t, std::size_t>> flips) {
  std::vector<std::vector<int>> v(g.observables());
  for (std::size_t k = 0; k < g.observables(); ++k) v[k].assign(g.phases(k).size(), 1);
  for (auto [k, i] : flips) v[k][i] = -1;
  return HiddenAssignment(g, v);
}

}  // namespace

TEST(Nchv, GridAndAssignmentValidation) {
  EXPECT_THROW(PhaseGrid(Phases{{0.0}}), ValidationError);
  EXPECT_THROW(PhaseGrid(Phases{{0.0}, {}}), ValidationError);
  EXPECT_THROW(PhaseGrid(Phases{{0.0, 0.0}, {1.0}}), ValidationError);
  const PhaseGrid g({{0.0, 1.0}, {0.0}});
  EXPECT_THROW(HiddenAssignment(g, {{1, 0}, {1}}), ValidationError);
  EXPECT_THROW(HiddenAssignment(g, {{1}, {1}}), ValidationError);
  const auto ens = Ensemble::runs({HiddenAssignment(g, {{1, 1}, {1}})});
  EXPECT_THROW(correlation_nchv2(ens, g, {2, 0}), ValidationError);
  EXPECT_THROW(correlation(ens, g, std::array<std::size_t, 3>{0, 0, 0}), ValidationError);
}

TEST(Nchv, EnsembleWeightsValidated) {
  const PhaseGrid g({{0.0}, {0.0}});
  const HiddenAssignment h(g, {{1}, {1}});
  EXPECT_THROW(Ensemble::weighted({{h, 0.5}, {h, 0.4}}), ValidationError);
  EXPECT_THROW(Ensemble::weighted({{h, 1.5}, {h, -0.5}}), ValidationError);
  EXPECT_THROW(Ensemble::runs({}), ValidationError);
  EXPECT_NO_THROW(Ensemble::weighted({{h, 0.25}, {h, 0.75}}));
}

TEST(Nchv, DeterministicAllPlus) {
  const auto g = cube_grid();
  const auto ens = Ensemble::runs({with_minus(g, {})});
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b)
      for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(correlation_nchv3(ens, g, {a, b, c}), 1.0);
}

TEST(Nchv, NegatingOneObservableCancels) {
  const auto g = cube_grid();
  const auto ens = Ensemble::runs({with_minus(g, {}), with_minus(g, {{0, 0}, {0, 1}})});
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b)
      for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(correlation_nchv3(ens, g, {a, b, c}), 0.0);
}

TEST(Nchv, FourMemberEnsembleHandSummed) {
  // Weights 0.1, 0.2, 0.3, 0.4 on: all +1; a(0) = -1; b(0) = c(0) = -1; a(0) = b(0) = c(0) = -1.
  const auto g = cube_grid();
  const auto ens = Ensemble::weighted({{with_minus(g, {}), 0.1},
                                       {with_minus(g, {{0, 0}}), 0.2},
                                       {with_minus(g, {{1, 0}, {2, 0}}), 0.3},
                                       {with_minus(g, {{0, 0}, {1, 0}, {2, 0}}), 0.4}});
  EXPECT_NEAR(correlation_nchv3(ens, g, {0, 0, 0}), -0.2, 1e-12);
  EXPECT_NEAR(correlation_nchv3(ens, g, {1, 1, 1}), 1.0, 1e-12);
  EXPECT_NEAR(correlation_nchv3(ens, g, {0, 1, 1}), -0.2, 1e-12);
  EXPECT_NEAR(correlation_nchv3(ens, g, {1, 0, 0}), 1.0, 1e-12);
  EXPECT_NEAR(correlation_nchv3(ens, g, {1, 0, 1}), -0.4, 1e-12);
}

TEST(Nchv, TwoObservableCorrelations) {
  const PhaseGrid g({{0.0, 1.0}, {0.0, 2.0}});
  EXPECT_EQ(correlation_nchv2(Ensemble::runs({HiddenAssignment(g, {{1, 1}, {1, 1}})}), g, {0, 0}), 1.0);
  const auto mixed = Ensemble::weighted({{HiddenAssignment(g, {{1, 1}, {1, 1}}), 0.5},
                                         {HiddenAssignment(g, {{1, 1}, {-1, -1}}), 0.5}});
  EXPECT_EQ(correlation_nchv2(mixed, g, {1, 1}), 0.0);
}

TEST(Nchv, RandomEnsembleMatchesBruteForce) {
  std::mt19937_64 rng(31);
  const PhaseGrid g({{0.1, 0.2, 0.3}, {0.0, 1.0}});
  std::vector<Ensemble::Member> members;
  std::vector<double> w(10);
  double total = 0.0;
  for (auto& x : w) total += (x = std::uniform_real_distribution<double>(0.0, 1.0)(rng));
  for (std::size_t m = 0; m < 10; ++m) members.push_back({HiddenAssignment::from_bits(g, rng() & 31u), w[m] / total});
  const auto ens = Ensemble::weighted(members);
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 2; ++b) {
      double oracle = 0.0;
      for (const auto& m : members) oracle += m.weight * m.assignment.value(0, a) * m.assignment.value(1, b);
      EXPECT_NEAR(correlation_nchv2(ens, g, {a, b}), oracle, 1e-12);
    }
  }
}

TEST(Nchv, GhzForcingAlgebra) {
  EXPECT_EQ(ghz_forcing(1, 1, 1), 1);
  EXPECT_EQ(ghz_forcing(1, 1, -1), -1);
  EXPECT_THROW(ghz_forcing(1, 0, 1), ValidationError);
  EXPECT_THROW(ghz_forcing_enumerated(2, 1, 1), ValidationError);
}

TEST(Nchv, GhzForcingAgreesWithEnumeration) {
  for (int c1 : {1, -1}) {
    for (int c2 : {1, -1}) {
      for (int c3 : {1, -1}) {
        const auto e = ghz_forcing_enumerated(c1, c2, c3);
        // Three independent parity constraints on six bits.
        EXPECT_EQ(e.consistent, 8u);
        ASSERT_EQ(e.products.size(), 1u);
        EXPECT_EQ(*e.products.begin(), ghz_forcing(c1, c2, c3));
      }
    }
  }
}

TEST(Nchv, ChshValue) {
  EXPECT_NEAR(chsh_value(0.586, 0.705, 0.714, -0.590), 2.595, 1e-12);
  EXPECT_EQ(chsh_value(1, 1, 1, -1), 4.0);
  const double a = kPi / 4, ap = -kPi / 4;
  EXPECT_NEAR(chsh_value(std::sin(a), std::sin(a + kPi / 2), std::sin(ap + kPi / 2), std::sin(ap)),
              2.0 * std::numbers::sqrt2, 1e-12);
  EXPECT_NO_THROW(chsh_value(1.04, 0, 0, 0));
  EXPECT_THROW(chsh_value(1.06, 0, 0, 0), ValidationError);
  EXPECT_THROW(chsh_value(NAN, 0, 0, 0), ValidationError);
}

TEST(Nchv, MerminValue) {
  // Quantum values at a = pi/2, a' = 0: E(a,pi/2,pi/2) = sin(3pi/2) = -1, the other three +1.
  const double h = kPi / 2;
  const double e1 = std::sin(h + h + h), e2 = std::sin(h), e3 = std::sin(h), e4 = std::sin(h);
  EXPECT_NEAR(mermin_value(e1, e2, e3, e4), -4.0, 1e-12);
  EXPECT_EQ(mermin_value(0, 0, 0, 0), 0.0);
  EXPECT_NEAR(mermin_value(-0.885, 0.885, 0.897, 0.884), -3.551, 1e-12);
  EXPECT_THROW(mermin_value(0, 0, -1.2, 0), ValidationError);
}

TEST(Nchv, ClassicalBoundsByEnumeration) {
  const auto chsh = classical_extrema(chsh_expression(), chsh_grid(kPi / 4, -kPi / 4));
  EXPECT_EQ(chsh.assignments, 16u);
  EXPECT_EQ(chsh.max, 2.0);
  EXPECT_EQ(chsh.min, -2.0);

  const auto mermin = classical_extrema(mermin_expression(), mermin_grid(kPi / 2, 0.0));
  EXPECT_EQ(mermin.assignments, 64u);
  EXPECT_EQ(mermin.max, 2.0);
  EXPECT_EQ(mermin.min, -2.0);

  EXPECT_EQ(classical_bound({{+1, {0, 0}}}, PhaseGrid({{0.0}, {0.0}})), 1.0);
}

TEST(Nchv, EnumerationRefusesLargeGrids) {
  std::vector<double> many(13);
  for (std::size_t i = 0; i < many.size(); ++i) many[i] = static_cast<double>(i);
  const PhaseGrid big({many, many});  // 26 binary choices
  try {
    classical_bound({{+1, {0, 0}}}, big);
    FAIL() << "expected refusal";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("24"), std::string::npos);
  }
  EXPECT_THROW(classical_bound({{+2, {0, 0}}}, chsh_grid(0, 1)), ValidationError);
  EXPECT_THROW(classical_bound({{+1, {0, 5}}}, chsh_grid(0, 1)), ValidationError);
}

TEST(Nchv, EnsembleExpressionsStayWithinClassicalBound) {
  std::mt19937_64 rng(32);
  const auto g = mermin_grid(kPi / 2, 0.0);
  const auto gc = chsh_grid(kPi / 4, -kPi / 4);
  const double mermin_bound = classical_bound(mermin_expression(), g);
  const double chsh_bound = classical_bound(chsh_expression(), gc);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Ensemble::Member> m3, m2;
    std::vector<double> w(1 + rng() % 12);
    double total = 0.0;
    for (auto& x : w) total += (x = u(rng));
    for (double x : w) {
      m3.push_back({HiddenAssignment::from_bits(g, rng() & 63u), x / total});
      m2.push_back({HiddenAssignment::from_bits(gc, rng() & 15u), x / total});
    }
    EXPECT_LE(std::abs(evaluate(mermin_expression(), Ensemble::weighted(m3), g)), mermin_bound + 1e-12);
    EXPECT_LE(std::abs(evaluate(chsh_expression(), Ensemble::weighted(m2), gc)), chsh_bound + 1e-12);
  }
}

TEST(Nchv, LowerBoundFromThreeCorrelations) {
  const auto b = nchv_lower_bound(0.885, 0.897, 0.884, {0.005, 0.005, 0.005});
  EXPECT_NEAR(b.bound, 0.666, 1e-12);
  EXPECT_NEAR(b.sigma, 0.005 * std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(b.sigma, 0.00866, 1e-5);
  EXPECT_EQ(nchv_lower_bound(1, 1, 1, {0, 0, 0}).bound, 1.0);
  EXPECT_NEAR(nchv_lower_bound(0.9, 0.9, 0.9, {0, 0, 0}).bound, 0.7, 1e-12);
  EXPECT_THROW(nchv_lower_bound(1.01, 0, 0, {0, 0, 0}), ValidationError);
  EXPECT_THROW(nchv_lower_bound(0, 0, 0, {-1, 0, 0}), ValidationError);
}

TEST(Nchv, QuantumViolatesWhatEveryConstrainedAssignmentForces) {
  const double h = kPi / 2;
  EXPECT_NEAR(experiment::correlation_qm3(experiment::PhaseSetting::ghz(h, h, h)), -1.0, 1e-12);
  const auto forced = ghz_forcing_enumerated(1, 1, 1);
  ASSERT_EQ(forced.products.size(), 1u);
  EXPECT_EQ(*forced.products.begin(), 1);
}
