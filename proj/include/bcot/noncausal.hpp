// Non-causal transport cost between two initializations of one chain under
// the discounted discrete metric, via the maximal-coupling series
//
//   W(x0, x0') = sum_k beta^k || P^k(x0, .) - P^k(x0', .) ||_TV,
//
// plus the printed two-state closed forms.
#pragma once

#include <cstddef>

#include "bcot/chain.hpp"

namespace bcot {

struct SeriesResult {
  double value = 0.0;           ///< partial sum of the first terms_used terms
  std::size_t terms_used = 0;
  double tail_bound = 0.0;      ///< true value lies in [value, value + tail_bound]
  std::size_t contraction_power = 1;  ///< m with delta(P^m) < 1 used for the certificate
};

/// Sums terms until the certified tail drops below tol. With beta = 1 some
/// power P^m, m a power of two up to the first one >= n^2, must have
/// delta(P^m) < 1; otherwise throws NoContraction.
SeriesResult noncausal_cost_series(const TransitionKernel& P, std::size_t x0, std::size_t x0_prime, double beta,
                                   double tol);

struct TwoStateForms {
  /// |P(x,x') - P(x',x)| / (P(x,x') + P(x',x)) / (1 - TV). Reported as printed;
  /// it disagrees with the series (it vanishes for symmetric kernels although
  /// any coupling pays 1 at time 0), hence the caveat flag.
  double w_formula = 0.0;
  double w_bc_formula = 0.0;  ///< 1 / (1 - TV)
  bool w_formula_caveat = true;
};

/// Closed forms for a two-state kernel, x = 0 and x' = 1. Throws NotTwoState
/// for n != 2 and InvalidArgument for a reducible kernel.
TwoStateForms two_state_closed_forms(const TransitionKernel& P);

}  // namespace bcot
