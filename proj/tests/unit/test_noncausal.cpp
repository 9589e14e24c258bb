#include <gtest/gtest.h>

#include "bcot/errors.hpp"
#include "bcot/noncausal.hpp"
#include "support/generators.hpp"

using namespace bcot;
namespace bt = bcot::testing;

namespace {

// Direct partial sum of beta^k TV(P^k(x,.), P^k(x',.)) propagating both rows.
double oracle_series(const TransitionKernel& P, std::size_t x, std::size_t xp, double beta, int terms) {
  const std::size_t n = P.size();
  std::vector<double> a(n, 0.0), b(n, 0.0);
  a[x] = 1.0;
  b[xp] = 1.0;
  double total = 0.0, weight = 1.0;
  for (int k = 0; k < terms; ++k) {
    total += weight * tv_distance(a, b);
    std::vector<double> na(n, 0.0), nb(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        na[j] += a[i] * P(i, j);
        nb[j] += b[i] * P(i, j);
      }
    a = na;
    b = nb;
    weight *= beta;
  }
  return total;
}

}  // namespace

TEST(Series, DiagonalStartIsZero) {
  const auto r = noncausal_cost_series(bt::worked_kernel(), 1, 1, 1.0, 1e-10);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.terms_used, 1u);
}

TEST(Series, TwoStateGeometricSums) {
  const auto P = bt::worked_kernel();
  auto r = noncausal_cost_series(P, 0, 1, 1.0, 1e-10);
  EXPECT_NEAR(r.value, 10.0 / 3, 1e-9);
  EXPECT_LE(r.tail_bound, 1e-10);
  EXPECT_LE(r.value, 10.0 / 3 + 1e-12);
  EXPECT_GE(r.value + r.tail_bound, 10.0 / 3 - 1e-12);
  r = noncausal_cost_series(P, 0, 1, 0.5, 1e-10);
  EXPECT_NEAR(r.value, 1.0 / 0.65, 1e-9);
}

TEST(Series, PeriodicKernelHasNoContraction) {
  EXPECT_THROW(noncausal_cost_series(validate_kernel({{0, 1}, {1, 0}}), 0, 1, 1.0, 1e-10), NoContraction);
  // Discounting restores a finite value: sum of 0.5^k = 2.
  EXPECT_NEAR(noncausal_cost_series(validate_kernel({{0, 1}, {1, 0}}), 0, 1, 0.5, 1e-10).value, 2.0, 1e-9);
}

TEST(Series, TailBoundBracketsOracle) {
  bt::Rng rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + trial % 5;
    const auto P = bt::random_ergodic_kernel(rng, n);
    const auto [x, xp] = bt::distinct_pair(rng, n);
    const double beta = trial % 2 ? 1.0 : 0.9;
    const auto r = noncausal_cost_series(P, x, xp, beta, 1e-9);
    const double oracle = oracle_series(P, x, xp, beta, 20000);
    EXPECT_LE(r.value, oracle + 1e-9) << "trial " << trial;
    EXPECT_GE(r.value + r.tail_bound, oracle - 1e-9) << "trial " << trial;
    EXPECT_LE(r.tail_bound, 1e-9);
  }
}

TEST(Series, ContractionNeedsPowerAboveOne) {
  // Zero diagonal on a 3-cycle plus chords: delta(P) = 1 but delta(P^m) < 1 for some m > 1.
  const auto P = validate_kernel({{0, 1, 0}, {0, 0, 1}, {0.5, 0.5, 0}});
  EXPECT_EQ(doeblin_coefficient(P), 1.0);
  const auto r = noncausal_cost_series(P, 0, 1, 1.0, 1e-10);
  EXPECT_GT(r.contraction_power, 1u);
  EXPECT_NEAR(r.value, oracle_series(P, 0, 1, 1.0, 20000), 1e-9);
}

TEST(ClosedForms, WorkedKernel) {
  const auto f = two_state_closed_forms(bt::worked_kernel());
  EXPECT_NEAR(f.w_bc_formula, 10.0 / 3, 1e-12);
  EXPECT_NEAR(f.w_formula, 10.0 / 9, 1e-12);
  EXPECT_TRUE(f.w_formula_caveat);
}

TEST(ClosedForms, SymmetricKernelWFormulaVanishes) {
  const auto f = two_state_closed_forms(bt::two_state(0.3, 0.3));
  EXPECT_EQ(f.w_formula, 0.0);
  EXPECT_TRUE(f.w_formula_caveat);
  // Every coupling pays 1 at time zero, so the series is at least 1.
  EXPECT_GE(noncausal_cost_series(bt::two_state(0.3, 0.3), 0, 1, 1.0, 1e-10).value, 1.0);
}

TEST(ClosedForms, Preconditions) {
  EXPECT_THROW(two_state_closed_forms(validate_kernel({{1.0}})), NotTwoState);
  EXPECT_THROW(two_state_closed_forms(validate_kernel({{1, 0}, {0, 1}})), InvalidArgument);
}
