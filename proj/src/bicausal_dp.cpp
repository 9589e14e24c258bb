#include "bcot/bicausal_dp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "bcot/errors.hpp"
#include "bcot/exact_ot.hpp"
#include "bcot/parallel.hpp"

namespace bcot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCouplingTol = 1e-9;
constexpr std::size_t kDenseSolveLimit = 4096;
// Pair counts below this are swept on the calling thread.
constexpr std::size_t kParallelThreshold = 64;
// Transition mass at or below this is rounding noise from the simplex.
constexpr double kSupportTol = 1e-12;

unsigned sweep_threads(std::size_t pairs, unsigned requested) {
  return pairs < kParallelThreshold ? 1U : requested;
}

std::vector<Distribution> kernel_rows(const TransitionKernel& K) {
  std::vector<Distribution> rows;
  rows.reserve(K.size());
  for (std::size_t x = 0; x < K.size(); ++x) rows.emplace_back(std::vector<double>(K.row(x).begin(), K.row(x).end()));
  return rows;
}

void require_table_shape(const ValueTable& V, const ProblemSpec& spec) {
  if (V.rows() != spec.size() || V.cols() != spec.size()) {
    throw DimensionMismatch("value table is " + std::to_string(V.rows()) + "x" + std::to_string(V.cols()) +
                            ", expected " + std::to_string(spec.size()) + "x" + std::to_string(spec.size()));
  }
}

void require_nonnegative(const ValueTable& V) {
  for (double v : V.data()) {
    if (std::isnan(v) || v < 0.0) throw InvalidArgument("value table entries must be nonnegative");
  }
}

void require_coupling(const CouplingKernel& Q, const ProblemSpec& spec) {
  if (!validate_coupling(Q, spec.P, spec.P_prime, kCouplingTol)) {
    throw InvalidCoupling("coupling kernel does not reproduce the marginals P and P'");
  }
}

// Row-stochastic precomputation shared by repeated sweeps.
struct BellmanContext {
  const ProblemSpec& spec;
  std::vector<Distribution> rows;
  std::vector<Distribution> rows_prime;

  explicit BellmanContext(const ProblemSpec& s) : spec(s), rows(kernel_rows(s.P)), rows_prime(kernel_rows(s.P_prime)) {}

  ValueTable sweep(const ValueTable& V, unsigned threads) const {
    const std::size_t n = spec.size();
    ValueTable next(n, n);
    parallel_for(n * n, sweep_threads(n * n, threads), [&](std::size_t pair) {
      const std::size_t x = pair / n;
      const std::size_t xp = pair % n;
      const double future = solve_transport(rows[x], rows_prime[xp], V).value;
      next(x, xp) = spec.stage_cost(x, xp) + (std::isinf(future) ? kInf : spec.beta * future);
    });
    return next;
  }
};

// sum_{y,y'} plan(y,y') V(y,y') with 0 * inf = 0.
double expected_value(const Matrix& plan, const ValueTable& V) { return plan_cost(plan, V); }

}  // namespace

Matrix discrete_metric(std::size_t n) {
  Matrix c(n, n, 1.0);
  for (std::size_t i = 0; i < n; ++i) c(i, i) = 0.0;
  return c;
}

ProblemSpec ProblemSpec::make(TransitionKernel P, TransitionKernel P_prime, std::size_t x0, std::size_t x0_prime,
                              Matrix stage_cost, double beta) {
  const std::size_t n = P.size();
  if (P_prime.size() != n) throw DimensionMismatch("P and P' act on state spaces of different size");
  if (stage_cost.rows() != n || stage_cost.cols() != n) throw DimensionMismatch("stage cost must be n x n");
  if (x0 >= n || x0_prime >= n) throw InvalidArgument("initial state out of range");
  for (double c : stage_cost.data()) {
    if (!std::isfinite(c) || c < 0.0) throw InvalidArgument("stage cost entries must be finite and nonnegative");
  }
  if (!(beta > 0.0 && beta <= 1.0)) throw InvalidArgument("discount factor must lie in (0, 1]");
  return ProblemSpec{std::move(P), std::move(P_prime), x0, x0_prime, std::move(stage_cost), beta};
}

bool ProblemSpec::is_coupling_time_instance() const {
  return beta == 1.0 && P == P_prime && stage_cost == discrete_metric(size());
}

ProblemSpec coupling_time_problem(const TransitionKernel& P, std::size_t x0, std::size_t x0_prime) {
  return ProblemSpec::make(P, P, x0, x0_prime, discrete_metric(P.size()), 1.0);
}

ValueTable apply_bellman(const ValueTable& V, const ProblemSpec& spec, unsigned threads) {
  require_table_shape(V, spec);
  require_nonnegative(V);
  return BellmanContext(spec).sweep(V, threads);
}

ValueTable apply_policy_operator(const ValueTable& V, const CouplingKernel& Q, const ProblemSpec& spec) {
  require_table_shape(V, spec);
  require_nonnegative(V);
  require_coupling(Q, spec);
  const std::size_t n = spec.size();
  ValueTable out(n, n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t xp = 0; xp < n; ++xp) {
      const double future = expected_value(Q.plan(x, xp), V);
      out(x, xp) = spec.stage_cost(x, xp) + (std::isinf(future) ? kInf : spec.beta * future);
    }
  }
  return out;
}

SolveReport value_iterate(const ProblemSpec& spec, const SolveOptions& options) {
  if (!(options.tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  if (options.max_iter < 1) throw InvalidArgument("max_iter must be at least 1");

  const std::size_t n = spec.size();
  const BellmanContext ctx(spec);
  SolveReport report;
  report.regime = spec.discounted() ? Regime::Discounted : Regime::Undiscounted;

  const double threshold =
      spec.discounted() ? options.tol * std::min(1.0, (1.0 - spec.beta) / spec.beta) : options.tol;
  const double ceiling = static_cast<double>(n * n) * std::max(sup_norm(spec.stage_cost), 1.0) * kDivergenceFactor;

  ValueTable V(n, n, 0.0);
  for (std::size_t k = 1; k <= options.max_iter; ++k) {
    ValueTable next = ctx.sweep(V, options.threads);
    double residual = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      for (std::size_t xp = 0; xp < n; ++xp) {
        double& v = next(x, xp);
        if (std::isinf(v)) continue;
        if (!spec.discounted() && v > ceiling) {
          v = kInf;
          report.infinite_flags.emplace_back(x, xp);
          continue;
        }
        residual = std::max(residual, std::abs(v - V(x, xp)));
      }
    }
    V = std::move(next);
    report.iterations = k;
    report.residual = residual;
    if (options.on_iterate) options.on_iterate(k, V);
    if (residual <= threshold) {
      report.converged = true;
      break;
    }
  }
  report.value_table = std::move(V);
  return report;
}

CouplingKernel extract_greedy_coupling(const ValueTable& V, const ProblemSpec& spec, unsigned threads) {
  require_table_shape(V, spec);
  require_nonnegative(V);
  const BellmanContext ctx(spec);
  const std::size_t n = spec.size();
  CouplingKernel Q(n);
  parallel_for(n * n, sweep_threads(n * n, threads), [&](std::size_t pair) {
    const std::size_t x = pair / n;
    const std::size_t xp = pair % n;
    if (std::isinf(V(x, xp))) {
      Q.plan(x, xp) = independent_plan(spec.P.row(x), spec.P_prime.row(xp));
      return;
    }
    Q.plan(x, xp) = solve_transport(ctx.rows[x], ctx.rows_prime[xp], V).plan.mass;
  });
  return Q;
}

FixedPointReport verify_fixed_point(const ValueTable& V, const ProblemSpec& spec, double tol) {
  FixedPointReport report;
  report.residual = sup_distance(apply_bellman(V, spec), V);
  report.is_fixed_point = report.residual <= tol;
  if (spec.is_coupling_time_instance()) {
    bool diagonal = true;
    for (std::size_t x = 0; x < spec.size(); ++x) diagonal = diagonal && std::abs(V(x, x)) <= tol;
    bool finite = true;
    for (double v : V.data()) finite = finite && std::isfinite(v);
    report.diagonal_ok = diagonal;
    report.finite_ok = finite;
  }
  return report;
}

bool verify_optimal_coupling(const CouplingKernel& Q, const ValueTable& V, const ProblemSpec& spec, double tol) {
  return sup_distance(apply_policy_operator(V, Q, spec), V) <= tol;
}

namespace {

using Dense = Eigen::MatrixXd;

// Pair-chain transition matrix; pair index s = x * n + x'.
Dense pair_transition_matrix(const CouplingKernel& Q) {
  const std::size_t n = Q.size();
  const auto N = static_cast<Eigen::Index>(n * n);
  Dense T = Dense::Zero(N, N);
  for (std::size_t s = 0; s < n * n; ++s) {
    const Matrix& plan = Q.plan(s / n, s % n);
    const auto cells = plan.data();
    for (std::size_t t = 0; t < cells.size(); ++t) T(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) = cells[t];
  }
  return T;
}

Eigen::VectorXd solve_checked(const Dense& A, const Eigen::VectorXd& b) {
  if (A.rows() == 0) return {};
  const Eigen::PartialPivLU<Dense> lu(A);
  Eigen::VectorXd x = lu.solve(b);
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  if (!x.allFinite() || (A * x - b).cwiseAbs().maxCoeff() > 1e-8 * scale * std::max(1.0, x.cwiseAbs().maxCoeff())) {
    throw SingularSystem("policy evaluation system is numerically singular");
  }
  return x;
}

ValueTable discounted_dense(const CouplingKernel& Q, const ProblemSpec& spec) {
  const std::size_t n = spec.size();
  const auto N = static_cast<Eigen::Index>(n * n);
  const Dense A = Dense::Identity(N, N) - spec.beta * pair_transition_matrix(Q);
  const Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(spec.stage_cost.data().data(), N);
  const Eigen::VectorXd v = solve_checked(A, c);
  ValueTable out(n, n);
  for (Eigen::Index s = 0; s < N; ++s) out.data()[static_cast<std::size_t>(s)] = std::max(0.0, v(s));
  return out;
}

// Absorbing decomposition of the undiscounted pair chain.
ValueTable undiscounted_dense(const CouplingKernel& Q, const ProblemSpec& spec) {
  const std::size_t n = spec.size();
  const std::size_t N = n * n;
  const Dense T = pair_transition_matrix(Q);
  const auto cost = spec.stage_cost.data();
  auto edge = [&](std::size_t s, std::size_t t) {
    return T(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) > kSupportTol;
  };

  // Largest zero-cost set closed under the pair chain.
  std::vector<bool> absorbing(N);
  for (std::size_t s = 0; s < N; ++s) absorbing[s] = cost[s] == 0.0;
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t s = 0; s < N; ++s) {
      if (!absorbing[s]) continue;
      for (std::size_t t = 0; t < N; ++t) {
        if (edge(s, t) && !absorbing[t]) {
          absorbing[s] = false;
          changed = true;
          break;
        }
      }
    }
  }

  // Backward reachability: which pairs can reach a given target set.
  auto can_reach = [&](const std::vector<bool>& target) {
    std::vector<bool> reach = target;
    std::vector<std::size_t> queue;
    for (std::size_t s = 0; s < N; ++s) {
      if (target[s]) queue.push_back(s);
    }
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t t = queue[head];
      for (std::size_t s = 0; s < N; ++s) {
        if (!reach[s] && edge(s, t)) {
          reach[s] = true;
          queue.push_back(s);
        }
      }
    }
    return reach;
  };
  const std::vector<bool> reaches_absorbing = can_reach(absorbing);
  std::vector<bool> stranded(N);
  for (std::size_t s = 0; s < N; ++s) stranded[s] = !reaches_absorbing[s];
  const std::vector<bool> infinite = can_reach(stranded);

  std::vector<std::size_t> transient;
  for (std::size_t s = 0; s < N; ++s) {
    if (!absorbing[s] && !infinite[s]) transient.push_back(s);
  }
  const auto m = static_cast<Eigen::Index>(transient.size());
  Dense A = Dense::Identity(m, m);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const std::size_t s = transient[static_cast<std::size_t>(i)];
    b(i) = cost[s];
    for (Eigen::Index j = 0; j < m; ++j) {
      A(i, j) -= T(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(transient[static_cast<std::size_t>(j)]));
    }
  }
  const Eigen::VectorXd v = solve_checked(A, b);

  ValueTable out(n, n, 0.0);
  for (std::size_t s = 0; s < N; ++s) {
    if (infinite[s]) out.data()[s] = kInf;
  }
  for (Eigen::Index i = 0; i < m; ++i) out.data()[transient[static_cast<std::size_t>(i)]] = std::max(0.0, v(i));
  return out;
}

// Power series sum_k beta^k Q^k c, for pair spaces too large for dense LU.
ValueTable series_evaluation(const CouplingKernel& Q, const ProblemSpec& spec) {
  const std::size_t n = spec.size();
  const SolveOptions defaults;
  const double ceiling = static_cast<double>(n * n) * std::max(sup_norm(spec.stage_cost), 1.0) * kDivergenceFactor;
  ValueTable V(n, n, 0.0);
  for (std::size_t k = 0; k < defaults.max_iter; ++k) {
    ValueTable next(n, n);
    double change = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      for (std::size_t xp = 0; xp < n; ++xp) {
        const double future = expected_value(Q.plan(x, xp), V);
        double v = spec.stage_cost(x, xp) + (std::isinf(future) ? kInf : spec.beta * future);
        if (v > ceiling) v = kInf;
        if (std::isfinite(v)) change = std::max(change, std::abs(v - V(x, xp)));
        next(x, xp) = v;
      }
    }
    V = std::move(next);
    if (change <= defaults.tol * 1e-3) break;
  }
  return V;
}

}  // namespace

ValueTable evaluate_policy(const CouplingKernel& Q, const ProblemSpec& spec) {
  require_coupling(Q, spec);
  const std::size_t n = spec.size();
  if (n * n > kDenseSolveLimit) return series_evaluation(Q, spec);
  return spec.discounted() ? discounted_dense(Q, spec) : undiscounted_dense(Q, spec);
}

}  // namespace bcot
