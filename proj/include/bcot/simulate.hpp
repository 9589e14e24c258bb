// Monte Carlo sampling of coupled trajectories.
//
// Every trajectory draws from its own SplitMix64 stream seeded with
// hash(master_seed, trajectory_index), so results do not depend on how
// trajectories are spread over threads. Reductions run in index order.
#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "bcot/bicausal_dp.hpp"
#include "bcot/couplings.hpp"

namespace bcot {

/// SplitMix64: a counter-based generator (output = mix(seed + k * golden)).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

 private:
  std::uint64_t state_;
};

std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index);

/// Inverse-CDF sampler over the row-major cells of every plan of a coupling.
class CouplingSampler {
 public:
  /// Throws InvalidCoupling unless every plan is a probability distribution.
  explicit CouplingSampler(const CouplingKernel& Q);
  std::pair<std::size_t, std::size_t> step(std::size_t x, std::size_t xp, double u) const;
  std::size_t size() const noexcept { return n_; }

 private:
  std::size_t n_;
  std::vector<std::vector<double>> cumulative_;
};

struct SimulationConfig {
  std::size_t samples = 100'000;
  std::size_t horizon_cap = 1'000'000;
  std::uint64_t master_seed = 0;
  unsigned threads = 0;
};

struct Trajectory {
  std::vector<std::size_t> first;
  std::vector<std::size_t> second;
};

/// States at times 0..horizon for both chains.
Trajectory sample_coupled_trajectory(const CouplingKernel& Q, std::size_t x0, std::size_t x0_prime,
                                     std::size_t horizon, std::uint64_t seed);

struct CouplingTimeStats {
  double mean = 0.0;       ///< over uncensored trajectories; NaN if all are censored
  double std_error = 0.0;
  std::size_t censored = 0;
  std::size_t samples = 0;
  /// False when Q lets diagonal pairs separate: T is then a first hitting
  /// time, not the transport cost.
  bool diagonal_absorbing = true;
};

/// Coupling time T = inf{k >= 0 : X_k = X'_k}; trajectory i uses
/// trajectory_seed(master_seed, i).
CouplingTimeStats estimate_coupling_time(const CouplingKernel& Q, std::size_t x0, std::size_t x0_prime,
                                         const SimulationConfig& cfg);

struct DiscountedCostEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  /// Deterministic bound on the discarded tail beta^H max(c) / (1 - beta).
  double truncation_bound = 0.0;
  std::size_t horizon = 0;
  std::size_t censored = 0;  ///< beta = 1 only: trajectories not coupled by horizon_cap
};

/// Monte Carlo estimate of sum_k beta^k c(X_k, X'_k) from (spec.x0, spec.x0_prime).
/// beta < 1 truncates at the first H with beta^H max(c) / (1 - beta) < 1e-9
/// (or horizon_cap). beta = 1 needs an absorbing diagonal with zero diagonal
/// cost and otherwise throws TruncationUnsafe.
DiscountedCostEstimate estimate_discounted_cost(const CouplingKernel& Q, const ProblemSpec& spec,
                                                const SimulationConfig& cfg);

/// Sum in fixed pairwise order.
double pairwise_sum(const std::vector<double>& values);

}  // namespace bcot
