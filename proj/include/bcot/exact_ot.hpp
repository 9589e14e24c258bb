// Exact discrete optimal transport between two distributions on the same
// finite state space, with extended (possibly +inf) costs.
//
// solve_transport runs a transportation (network) simplex on the bipartite
// graph rows -> columns. Costs are handled lexicographically: the primary
// objective is the mass placed on +inf cells, the secondary objective is the
// ordinary cost over finite cells. This is the two-phase method without a
// big-M constant. Entering arcs follow Bland's rule (lowest row-major cell
// index with negative reduced cost) and ties in the ratio test go to the
// lowest cell index, so the returned vertex is deterministic.
#pragma once

#include <cstddef>
#include <vector>

#include "bcot/chain.hpp"
#include "bcot/matrix.hpp"

namespace bcot {

/// Cost table entries: finite nonnegative values or +inf.
using CostTable = Matrix;

/// Row-major mask; true marks a finite-cost cell.
using CellMask = std::vector<std::vector<bool>>;

/// Mass forced onto +inf cells above this is treated as genuine.
inline constexpr double kInfiniteMassTol = 1e-12;

struct TransportPlan {
  Matrix mass;
  Distribution row_marginal;
  Distribution col_marginal;
};

struct TransportResult {
  double value;  ///< +inf when every feasible plan puts mass on a +inf cell
  TransportPlan plan;
};

TransportResult solve_transport(const Distribution& p, const Distribution& q, const CostTable& cost);

/// Minimum total mass any plan must place on cells where finite_mask is false.
double min_infinite_mass(const Distribution& p, const Distribution& q, const CellMask& finite_mask);

/// Test oracle: enumerates every spanning-tree basis of the transportation
/// polytope and returns the best feasible objective. Exponential; n <= 6.
double brute_force_transport(const Distribution& p, const Distribution& q, const CostTable& cost);

/// sum a(y,y') cost(y,y') with 0 * inf = 0 and positive mass on +inf giving +inf.
double plan_cost(const Matrix& mass, const CostTable& cost);

}  // namespace bcot
