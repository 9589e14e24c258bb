// Randomized properties tying the modules together.
#include <gtest/gtest.h>

#include <cmath>

#include "bcot/bicausal_dp.hpp"
#include "bcot/cli/report.hpp"
#include "bcot/couplings.hpp"
#include "bcot/noncausal.hpp"
#include "support/generators.hpp"

using namespace bcot;
namespace bt = bcot::testing;

namespace {

SolveReport solve(const ProblemSpec& spec) {
  SolveOptions opts;
  opts.tol = 1e-11;
  return value_iterate(spec, opts);
}

}  // namespace

TEST(Properties, OptimalValueBelowEveryConstructedCoupling) {
  bt::Rng rng(501);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 2 + trial % 4;
    const auto P = bt::random_ergodic_kernel(rng, n);
    const double beta = trial % 2 ? 1.0 : 0.8;
    const auto spec = ProblemSpec::make(P, P, 0, 0, discrete_metric(n), beta);
    const auto report = solve(spec);
    ASSERT_TRUE(report.converged);
    const auto& W = report.value_table;
    for (const auto& Q : {classic_coupling(P), wasserstein_coupling(P, P)}) {
      const auto v = evaluate_policy(Q, spec);
      for (std::size_t i = 0; i < n * n; ++i) EXPECT_LE(W.data()[i], v.data()[i] + 1e-8);
    }
    const auto greedy = extract_greedy_coupling(W, spec);
    EXPECT_TRUE(validate_coupling(greedy, P, P, 1e-9));
    EXPECT_LE(sup_distance(evaluate_policy(greedy, spec), W), 1e-7);
  }
}

TEST(Properties, SymmetryAndZeroDiagonal) {
  bt::Rng rng(502);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + trial % 4;
    const auto P = bt::random_ergodic_kernel(rng, n);
    const auto W = solve(coupling_time_problem(P)).value_table;
    for (std::size_t x = 0; x < n; ++x) {
      EXPECT_EQ(W(x, x), 0.0);
      for (std::size_t xp = 0; xp < n; ++xp) EXPECT_NEAR(W(x, xp), W(xp, x), 1e-8);
    }
  }
}

TEST(Properties, DiscountedValueBelowUndiscounted) {
  bt::Rng rng(503);
  for (int trial = 0; trial < 15; ++trial) {
    const std::size_t n = 2 + trial % 3;
    const auto P = bt::random_ergodic_kernel(rng, n);
    const auto full = solve(coupling_time_problem(P)).value_table;
    const auto disc = solve(ProblemSpec::make(P, P, 0, 0, discrete_metric(n), 0.6)).value_table;
    for (std::size_t i = 0; i < n * n; ++i) EXPECT_LE(disc.data()[i], full.data()[i] + 1e-8);
  }
}

TEST(Properties, NoncausalLowerBoundDifferentKernelsAtZeroCost) {
  // With P != P' the non-causal series does not apply, but W_bc is still
  // bounded below by the one-step stage cost.
  bt::Rng rng(504);
  for (int trial = 0; trial < 15; ++trial) {
    const std::size_t n = 3;
    const auto P = bt::random_positive_kernel(rng, n);
    const auto Pp = bt::random_positive_kernel(rng, n);
    const auto c = bt::random_metric_like_cost(rng, n);
    const auto W = solve(ProblemSpec::make(P, Pp, 0, 0, c, 0.9)).value_table;
    for (std::size_t i = 0; i < n * n; ++i) EXPECT_GE(W.data()[i], c.data()[i] - 1e-12);
  }
}

TEST(Properties, CouplingJsonRoundTripIsLossless) {
  bt::Rng rng(505);
  const auto P = bt::random_sparse_kernel(rng, 4);
  const auto Pp = bt::random_sparse_kernel(rng, 4);
  const auto Q = wasserstein_coupling(P, Pp);
  const auto space = StateSpace::indexed(4);
  const auto text = cli::coupling_to_json(Q, space).dump();
  const auto back = cli::coupling_from_json(nlohmann::json::parse(text), space);
  for (std::size_t x = 0; x < 4; ++x)
    for (std::size_t xp = 0; xp < 4; ++xp) EXPECT_EQ(back.plan(x, xp), Q.plan(x, xp));
}

TEST(Properties, ValueTableJsonRoundTripKeepsInfinity) {
  Matrix m = Matrix::from_rows({{0.1 + 0.2, std::numeric_limits<double>::infinity()}, {1.0 / 3, 0}});
  const auto back = cli::matrix_from_json(nlohmann::json::parse(cli::matrix_to_json(m).dump()), "w", 2);
  EXPECT_EQ(back, m);
}
