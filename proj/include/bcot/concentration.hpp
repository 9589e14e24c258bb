// Bounded-differences concentration for 1-Lipschitz (Hamming) functions of a
// Markov chain path:
//
//   P(|f(X_1..X_n) - E f| >= t) <= 2 exp(-2 t^2 / (n ||W||^2)),
//
// where ||W|| is the sup-norm of a transport-cost table between pairs of
// initializations. Any upper bound on ||W|| gives a valid (weaker) bound.
#pragma once

#include <cstddef>

#include "bcot/bicausal_dp.hpp"

namespace bcot {

enum class ProxyMode {
  NoncausalSeries,  ///< max over pairs of the maximal-coupling series
  BicausalDp,       ///< sup-norm of W_bc from value iteration
  Doeblin,          ///< 1 / (1 - delta(P))
};

struct BoundRequest {
  std::size_t n = 1;  ///< number of chain steps
  double t = 0.0;     ///< deviation
  ProxyMode mode = ProxyMode::Doeblin;
};

/// Range proxy ||W||. The series and dp modes need a coupling-time instance
/// (NotCouplingInstance otherwise); doeblin needs delta(P) < 1 (NoContraction).
/// dp mode returns +inf when value iteration flags or fails to converge.
double variance_proxy(const ProblemSpec& spec, ProxyMode mode, const SolveOptions& options = {});

/// 2 exp(-2 t^2 / (n proxy^2)), never above 2. Throws InfiniteProxy for an
/// infinite proxy and InvalidArgument for t <= 0, n == 0 or proxy <= 0.
double mcdiarmid_bound(const BoundRequest& req, double proxy);

}  // namespace bcot
