#include "bcot/noncausal.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "bcot/errors.hpp"

namespace bcot {

namespace {

constexpr std::size_t kMaxTerms = 100'000'000;

struct Contraction {
  std::size_t power = 1;
  double delta = 1.0;
};

// First m in 1, 2, 4, ... (up to the first power of two >= n^2) with delta(P^m) < 1.
std::optional<Contraction> find_contraction(const TransitionKernel& P) {
  const std::size_t n = P.size();
  const std::size_t limit = n * n;
  TransitionKernel power = P;
  for (std::size_t m = 1;; m *= 2) {
    const double delta = doeblin_coefficient(power);
    if (delta < 1.0) return Contraction{m, delta};
    if (m >= limit) return std::nullopt;
    power = kernel_power(power, 2);
  }
}

void step(const TransitionKernel& P, std::vector<double>& dist, std::vector<double>& scratch) {
  std::fill(scratch.begin(), scratch.end(), 0.0);
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] == 0.0) continue;
    const auto r = P.row(i);
    for (std::size_t j = 0; j < dist.size(); ++j) scratch[j] += dist[i] * r[j];
  }
  dist.swap(scratch);
}

}  // namespace

SeriesResult noncausal_cost_series(const TransitionKernel& P, std::size_t x0, std::size_t x0_prime, double beta,
                                   double tol) {
  const std::size_t n = P.size();
  if (x0 >= n || x0_prime >= n) throw InvalidArgument("initial state out of range");
  if (!(beta > 0.0 && beta <= 1.0)) throw InvalidArgument("discount factor must lie in (0, 1]");
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");

  auto contraction = find_contraction(P);
  if (!contraction) {
    if (beta == 1.0) throw NoContraction("no power P^m with m <= n^2 contracts in total variation");
    contraction = Contraction{1, doeblin_coefficient(P)};
  }
  const std::size_t m = contraction->power;
  double block = 0.0;  // sum_{r < m} beta^r
  for (std::size_t r = 0; r < m; ++r) block += std::pow(beta, static_cast<double>(r));
  const double tail_factor = block / (1.0 - std::pow(beta, static_cast<double>(m)) * contraction->delta);

  std::vector<double> u(n, 0.0), w(n, 0.0), scratch(n);
  u[x0] = 1.0;
  w[x0_prime] = 1.0;

  SeriesResult result;
  result.contraction_power = m;
  double discount = 1.0;  // beta^k
  for (std::size_t k = 0; k < kMaxTerms; ++k) {
    result.value += discount * tv_distance(u, w);
    step(P, u, scratch);
    step(P, w, scratch);
    discount *= beta;
    result.terms_used = k + 1;
    // Sum over j >= K of beta^j TV_j <= beta^K TV_K * tail_factor (Dobrushin contraction in blocks of m).
    result.tail_bound = discount * tv_distance(u, w) * tail_factor;
    if (result.tail_bound < tol) return result;
  }
  throw NoContraction("series did not reach the requested tolerance");
}

TwoStateForms two_state_closed_forms(const TransitionKernel& P) {
  if (P.size() != 2) throw NotTwoState("closed forms require exactly two states");
  const double leave0 = P(0, 1);
  const double leave1 = P(1, 0);
  if (!(leave0 > 0.0 && leave1 > 0.0)) throw InvalidArgument("closed forms require an irreducible kernel");
  const double tv = tv_distance(P.row(0), P.row(1));
  TwoStateForms forms;
  forms.w_bc_formula = 1.0 / (1.0 - tv);
  forms.w_formula = std::abs(leave0 - leave1) / (leave0 + leave1) * forms.w_bc_formula;
  forms.w_formula_caveat = true;
  return forms;
}

}  // namespace bcot
