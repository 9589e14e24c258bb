// Markovian couplings of two chains on a common state space: a transition
// kernel on pairs (x, x') whose marginals reproduce P(x, .) and P'(x', .).
#pragma once

#include <cstddef>
#include <vector>

#include "bcot/chain.hpp"
#include "bcot/matrix.hpp"

namespace bcot {

/// Dense table of one n x n plan per state pair; plan(x, x')(y, y') is the
/// probability of moving from (x, x') to (y, y').
class CouplingKernel {
 public:
  CouplingKernel() = default;
  explicit CouplingKernel(std::size_t n) : n_(n), plans_(n * n, Matrix(n, n)) {}

  std::size_t size() const noexcept { return n_; }
  const Matrix& plan(std::size_t x, std::size_t xp) const { return plans_.at(x * n_ + xp); }
  Matrix& plan(std::size_t x, std::size_t xp) { return plans_.at(x * n_ + xp); }
  double operator()(std::size_t x, std::size_t xp, std::size_t y, std::size_t yp) const {
    return plans_[x * n_ + xp](y, yp);
  }

 private:
  std::size_t n_ = 0;
  std::vector<Matrix> plans_;
};

/// Doeblin's coupling: independent moves until the chains meet, identical moves afterwards.
CouplingKernel classic_coupling(const TransitionKernel& P);

CouplingKernel independent_coupling(const TransitionKernel& P, const TransitionKernel& P_prime);

/// Product plan P(x, .) x P'(x', .) for a single pair.
Matrix independent_plan(std::span<const double> row, std::span<const double> row_prime);

/// Maximal one-step agreement, then conditionally independent residuals.
/// For P != P' the second row is taken from P' throughout; a pair (x, x) only
/// sticks when the two rows coincide.
CouplingKernel wasserstein_coupling(const TransitionKernel& P, const TransitionKernel& P_prime);

/// Both marginal constraints within tol and no entry below -tol.
bool validate_coupling(const CouplingKernel& Q, const TransitionKernel& P, const TransitionKernel& P_prime,
                       double tol);

/// Q((x,x),(y,y')) = 1{y=y'} P(x,y) within tol.
bool check_sticky(const CouplingKernel& Q, const TransitionKernel& P, double tol);

/// Diagonal pairs move only to diagonal pairs (mass off the diagonal <= tol).
/// Unlike check_sticky this needs no kernel.
bool diagonal_is_absorbing(const CouplingKernel& Q, double tol);

/// Every plan is a probability distribution over S x S within tol.
bool plans_are_stochastic(const CouplingKernel& Q, double tol);

}  // namespace bcot
