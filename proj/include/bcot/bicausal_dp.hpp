// Dynamic programming for bicausal transport between two finite Markov chains.
//
// The pair process (X, X') is a Markov decision process on S x S whose action
// at (x, x') is any transport plan between P(x, .) and P'(x', .). The Bellman
// operator is
//
//   T(V)(x, x') = c(x, x') + beta * min_{a in U(x, x')} <a, V>,
//
// and the bicausal cost W_bc is its minimal nonnegative fixed point, reached by
// value iteration from V = 0.
#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "bcot/chain.hpp"
#include "bcot/couplings.hpp"
#include "bcot/matrix.hpp"

namespace bcot {

/// Extended nonnegative reals indexed by state pairs.
using ValueTable = Matrix;

/// Indicator cost 1{x != x'}.
Matrix discrete_metric(std::size_t n);

struct ProblemSpec {
  TransitionKernel P;
  TransitionKernel P_prime;
  std::size_t x0 = 0;
  std::size_t x0_prime = 0;
  Matrix stage_cost;
  double beta = 1.0;

  /// Validates sizes, initial states, cost >= 0 (finite) and beta in (0, 1].
  static ProblemSpec make(TransitionKernel P, TransitionKernel P_prime, std::size_t x0, std::size_t x0_prime,
                          Matrix stage_cost, double beta);

  std::size_t size() const noexcept { return P.size(); }
  bool discounted() const noexcept { return beta < 1.0; }
  /// P == P', discrete metric cost, beta == 1: W_bc is the minimal expected coupling time.
  bool is_coupling_time_instance() const;
};

/// Single-kernel coupling-time problem (discrete metric, beta = 1).
ProblemSpec coupling_time_problem(const TransitionKernel& P, std::size_t x0 = 0, std::size_t x0_prime = 0);

enum class Regime { Discounted, Undiscounted };

/// Above n^2 * max(c) * kDivergenceFactor an undiscounted iterate is flagged possibly infinite.
inline constexpr double kDivergenceFactor = 1e6;

struct SolveOptions {
  double tol = 1e-9;
  std::size_t max_iter = 100000;
  unsigned threads = 0;  ///< 0 = hardware concurrency
  /// Called after every sweep with the iteration count and the new table.
  std::function<void(std::size_t, const ValueTable&)> on_iterate;
};

struct SolveReport {
  ValueTable value_table;
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
  Regime regime = Regime::Undiscounted;
  std::vector<std::pair<std::size_t, std::size_t>> infinite_flags;
};

ValueTable apply_bellman(const ValueTable& V, const ProblemSpec& spec, unsigned threads = 0);

/// T_Q(V) = c + beta * Q V. Throws InvalidCoupling unless Q couples (P, P').
ValueTable apply_policy_operator(const ValueTable& V, const CouplingKernel& Q, const ProblemSpec& spec);

/// Jacobi value iteration from V = 0.
///
/// Discounted: stops once the sweep residual is <= tol * min(1, (1 - beta) / beta),
/// which puts the iterate within tol of W_bc. Undiscounted: iterates increase
/// monotonically; stops at residual <= tol or max_iter. Entries crossing the
/// divergence ceiling become +inf, are listed in infinite_flags and no longer
/// count toward the residual.
SolveReport value_iterate(const ProblemSpec& spec, const SolveOptions& options = {});

/// Greedy (argmin) plan of the Bellman operator at V for every pair. Pairs
/// where V is +inf receive the independent plan.
CouplingKernel extract_greedy_coupling(const ValueTable& V, const ProblemSpec& spec, unsigned threads = 0);

struct FixedPointReport {
  double residual = 0.0;
  bool is_fixed_point = false;
  /// Only evaluated for coupling-time instances.
  std::optional<bool> diagonal_ok;
  std::optional<bool> finite_ok;
};

FixedPointReport verify_fixed_point(const ValueTable& V, const ProblemSpec& spec, double tol);

/// ||T_Q(V) - V||_inf <= tol. Throws InvalidCoupling for an invalid Q.
bool verify_optimal_coupling(const CouplingKernel& Q, const ValueTable& V, const ProblemSpec& spec, double tol);

/// Expected total discounted cost sum_k beta^k Q^k c under a fixed coupling.
///
/// Up to n^2 <= 4096 pairs this is a dense LU solve. With beta = 1 the pair
/// chain is split into the largest zero-cost set closed under Q (value 0),
/// pairs that reach it almost surely (linear solve) and the rest (+inf).
/// Larger problems fall back to a capped power series.
ValueTable evaluate_policy(const CouplingKernel& Q, const ProblemSpec& spec);

}  // namespace bcot
