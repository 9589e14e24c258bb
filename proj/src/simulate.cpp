#include "bcot/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "bcot/errors.hpp"
#include "bcot/parallel.hpp"

namespace bcot {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr double kTruncationTarget = 1e-9;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double pairwise_range(const double* v, std::size_t count) {
  if (count <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) s += v[i];
    return s;
  }
  const std::size_t half = count / 2;
  return pairwise_range(v, half) + pairwise_range(v + half, count - half);
}

struct SampleMoments {
  double mean;
  double std_error;
};

// Mean and standard error of the mean over the finite entries of `values`.
SampleMoments moments(const std::vector<double>& values) {
  std::vector<double> kept;
  kept.reserve(values.size());
  for (double v : values) {
    if (std::isfinite(v)) kept.push_back(v);
  }
  if (kept.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  const auto count = static_cast<double>(kept.size());
  const double mean = pairwise_sum(kept) / count;
  if (kept.size() < 2) return {mean, 0.0};
  std::vector<double> squares(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) squares[i] = (kept[i] - mean) * (kept[i] - mean);
  const double variance = pairwise_sum(squares) / (count - 1.0);
  return {mean, std::sqrt(variance / count)};
}

void check_start(const CouplingKernel& Q, std::size_t x0, std::size_t x0_prime) {
  if (x0 >= Q.size() || x0_prime >= Q.size()) throw InvalidArgument("initial state out of range");
}

void check_config(const SimulationConfig& cfg) {
  if (cfg.samples < 1) throw InvalidArgument("samples must be at least 1");
  if (cfg.horizon_cap < 1) throw InvalidArgument("horizon_cap must be at least 1");
}

}  // namespace

std::uint64_t SplitMix64::next() {
  state_ += kGolden;
  return mix64(state_);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index) {
  return mix64(master_seed ^ mix64(index + kGolden));
}

double pairwise_sum(const std::vector<double>& values) { return pairwise_range(values.data(), values.size()); }

CouplingSampler::CouplingSampler(const CouplingKernel& Q) : n_(Q.size()) {
  if (!plans_are_stochastic(Q, 1e-9)) throw InvalidCoupling("coupling plans must be probability distributions");
  cumulative_.resize(n_ * n_);
  for (std::size_t x = 0; x < n_; ++x) {
    for (std::size_t xp = 0; xp < n_; ++xp) {
      const auto cells = Q.plan(x, xp).data();
      auto& cdf = cumulative_[x * n_ + xp];
      cdf.resize(cells.size());
      double running = 0.0;
      for (std::size_t c = 0; c < cells.size(); ++c) {
        running += std::max(0.0, cells[c]);
        cdf[c] = running;
      }
    }
  }
}

std::pair<std::size_t, std::size_t> CouplingSampler::step(std::size_t x, std::size_t xp, double u) const {
  const auto& cdf = cumulative_[x * n_ + xp];
  const double target = u * cdf.back();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
  if (it == cdf.end()) {
    // u * total rounded up to the last value: take the last cell with mass.
    it = std::lower_bound(cdf.begin(), cdf.end(), cdf.back());
  }
  const auto cell = static_cast<std::size_t>(it - cdf.begin());
  return {cell / n_, cell % n_};
}

Trajectory sample_coupled_trajectory(const CouplingKernel& Q, std::size_t x0, std::size_t x0_prime,
                                     std::size_t horizon, std::uint64_t seed) {
  check_start(Q, x0, x0_prime);
  const CouplingSampler sampler(Q);
  SplitMix64 rng(seed);
  Trajectory t;
  t.first.reserve(horizon + 1);
  t.second.reserve(horizon + 1);
  std::size_t x = x0;
  std::size_t xp = x0_prime;
  t.first.push_back(x);
  t.second.push_back(xp);
  for (std::size_t k = 0; k < horizon; ++k) {
    std::tie(x, xp) = sampler.step(x, xp, rng.uniform());
    t.first.push_back(x);
    t.second.push_back(xp);
  }
  return t;
}

CouplingTimeStats estimate_coupling_time(const CouplingKernel& Q, std::size_t x0, std::size_t x0_prime,
                                         const SimulationConfig& cfg) {
  check_start(Q, x0, x0_prime);
  check_config(cfg);
  const CouplingSampler sampler(Q);
  constexpr double kCensored = std::numeric_limits<double>::infinity();

  std::vector<double> times(cfg.samples);
  parallel_for(cfg.samples, cfg.threads, [&](std::size_t i) {
    SplitMix64 rng(trajectory_seed(cfg.master_seed, i));
    std::size_t x = x0;
    std::size_t xp = x0_prime;
    for (std::size_t k = 0; k <= cfg.horizon_cap; ++k) {
      if (x == xp) {
        times[i] = static_cast<double>(k);
        return;
      }
      if (k == cfg.horizon_cap) break;
      std::tie(x, xp) = sampler.step(x, xp, rng.uniform());
    }
    times[i] = kCensored;
  });

  CouplingTimeStats stats;
  stats.samples = cfg.samples;
  stats.censored = static_cast<std::size_t>(std::count(times.begin(), times.end(), kCensored));
  const auto m = moments(times);
  stats.mean = m.mean;
  stats.std_error = m.std_error;
  stats.diagonal_absorbing = diagonal_is_absorbing(Q, 1e-12);
  return stats;
}

DiscountedCostEstimate estimate_discounted_cost(const CouplingKernel& Q, const ProblemSpec& spec,
                                                const SimulationConfig& cfg) {
  check_config(cfg);
  if (Q.size() != spec.size()) throw DimensionMismatch("coupling and problem sizes differ");
  const CouplingSampler sampler(Q);
  const double max_cost = sup_norm(spec.stage_cost);
  bool zero_diagonal = true;
  for (std::size_t x = 0; x < spec.size(); ++x) zero_diagonal = zero_diagonal && spec.stage_cost(x, x) == 0.0;
  const bool absorbing = diagonal_is_absorbing(Q, 1e-12);

  DiscountedCostEstimate est;
  if (spec.discounted()) {
    // Smallest H with beta^H max(c) / (1 - beta) < target, capped.
    std::size_t h = 0;
    double tail = max_cost / (1.0 - spec.beta);
    while (tail >= kTruncationTarget && h < cfg.horizon_cap) {
      tail *= spec.beta;
      ++h;
    }
    est.horizon = h;
    est.truncation_bound = tail;
  } else {
    if (!absorbing || !zero_diagonal) {
      throw TruncationUnsafe("beta = 1 needs a coupling whose diagonal is absorbing and zero diagonal cost");
    }
    est.horizon = cfg.horizon_cap;
  }
  // Once the chains meet under an absorbing diagonal with zero diagonal cost
  // every later term vanishes.
  const bool stop_on_meeting = absorbing && zero_diagonal;

  constexpr double kCensored = std::numeric_limits<double>::infinity();
  std::vector<double> totals(cfg.samples);
  parallel_for(cfg.samples, cfg.threads, [&](std::size_t i) {
    SplitMix64 rng(trajectory_seed(cfg.master_seed, i));
    std::size_t x = spec.x0;
    std::size_t xp = spec.x0_prime;
    double total = 0.0;
    double discount = 1.0;
    for (std::size_t k = 0; k < est.horizon; ++k) {
      if (stop_on_meeting && x == xp) {
        totals[i] = total;
        return;
      }
      total += discount * spec.stage_cost(x, xp);
      discount *= spec.beta;
      std::tie(x, xp) = sampler.step(x, xp, rng.uniform());
    }
    totals[i] = (!spec.discounted() && x != xp) ? kCensored : total;
  });

  est.censored = static_cast<std::size_t>(std::count(totals.begin(), totals.end(), kCensored));
  const auto m = moments(totals);
  est.mean = m.mean;
  est.std_error = m.std_error;
  return est;
}

}  // namespace bcot
