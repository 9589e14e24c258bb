#include "bcot/couplings.hpp"

#include <algorithm>
#include <cmath>

#include "bcot/errors.hpp"

namespace bcot {

namespace {

void require_same_space(const TransitionKernel& P, const TransitionKernel& P_prime) {
  if (P.size() != P_prime.size()) throw DimensionMismatch("kernels act on state spaces of different size");
}

double positive_part(double v) { return v > 0.0 ? v : 0.0; }

}  // namespace

Matrix independent_plan(std::span<const double> row, std::span<const double> row_prime) {
  Matrix plan(row.size(), row_prime.size());
  for (std::size_t y = 0; y < row.size(); ++y) {
    for (std::size_t yp = 0; yp < row_prime.size(); ++yp) plan(y, yp) = row[y] * row_prime[yp];
  }
  return plan;
}

CouplingKernel classic_coupling(const TransitionKernel& P) {
  const std::size_t n = P.size();
  CouplingKernel Q(n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t xp = 0; xp < n; ++xp) {
      if (x != xp) {
        Q.plan(x, xp) = independent_plan(P.row(x), P.row(xp));
        continue;
      }
      Matrix& plan = Q.plan(x, x);
      for (std::size_t y = 0; y < n; ++y) plan(y, y) = P(x, y);
    }
  }
  return Q;
}

CouplingKernel independent_coupling(const TransitionKernel& P, const TransitionKernel& P_prime) {
  require_same_space(P, P_prime);
  const std::size_t n = P.size();
  CouplingKernel Q(n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t xp = 0; xp < n; ++xp) Q.plan(x, xp) = independent_plan(P.row(x), P_prime.row(xp));
  }
  return Q;
}

CouplingKernel wasserstein_coupling(const TransitionKernel& P, const TransitionKernel& P_prime) {
  require_same_space(P, P_prime);
  const std::size_t n = P.size();
  CouplingKernel Q(n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t xp = 0; xp < n; ++xp) {
      const auto a = P.row(x);
      const auto b = P_prime.row(xp);
      Matrix& plan = Q.plan(x, xp);
      const double tv = tv_distance(a, b);
      if (x == xp && tv == 0.0) {
        for (std::size_t y = 0; y < n; ++y) plan(y, y) = a[y];
        continue;
      }
      for (std::size_t y = 0; y < n; ++y) plan(y, y) = std::min(a[y], b[y]);
      if (tv == 0.0) continue;
      for (std::size_t y = 0; y < n; ++y) {
        const double excess = positive_part(a[y] - b[y]);
        if (excess == 0.0) continue;
        for (std::size_t yp = 0; yp < n; ++yp) {
          if (yp == y) continue;
          plan(y, yp) = excess * positive_part(b[yp] - a[yp]) / tv;
        }
      }
    }
  }
  return Q;
}

bool plans_are_stochastic(const CouplingKernel& Q, double tol) {
  const std::size_t n = Q.size();
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t xp = 0; xp < n; ++xp) {
      const Matrix& plan = Q.plan(x, xp);
      if (plan.rows() != n || plan.cols() != n) return false;
      double total = 0.0;
      for (double v : plan.data()) {
        if (!std::isfinite(v) || v < -tol) return false;
        total += v;
      }
      if (std::abs(total - 1.0) > tol) return false;
    }
  }
  return true;
}

bool validate_coupling(const CouplingKernel& Q, const TransitionKernel& P, const TransitionKernel& P_prime,
                       double tol) {
  const std::size_t n = P.size();
  if (P_prime.size() != n || Q.size() != n) return false;
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t xp = 0; xp < n; ++xp) {
      const Matrix& plan = Q.plan(x, xp);
      if (plan.rows() != n || plan.cols() != n) return false;
      for (std::size_t y = 0; y < n; ++y) {
        double row_sum = 0.0;
        double col_sum = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          if (!std::isfinite(plan(y, k)) || plan(y, k) < -tol) return false;
          row_sum += plan(y, k);
          col_sum += plan(k, y);
        }
        if (std::abs(row_sum - P(x, y)) > tol) return false;
        if (std::abs(col_sum - P_prime(xp, y)) > tol) return false;
      }
    }
  }
  return true;
}

bool check_sticky(const CouplingKernel& Q, const TransitionKernel& P, double tol) {
  const std::size_t n = P.size();
  if (Q.size() != n) return false;
  for (std::size_t x = 0; x < n; ++x) {
    const Matrix& plan = Q.plan(x, x);
    for (std::size_t y = 0; y < n; ++y) {
      for (std::size_t yp = 0; yp < n; ++yp) {
        const double expected = y == yp ? P(x, y) : 0.0;
        if (std::abs(plan(y, yp) - expected) > tol) return false;
      }
    }
  }
  return true;
}

bool diagonal_is_absorbing(const CouplingKernel& Q, double tol) {
  const std::size_t n = Q.size();
  for (std::size_t x = 0; x < n; ++x) {
    const Matrix& plan = Q.plan(x, x);
    double off = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      for (std::size_t yp = 0; yp < n; ++yp) {
        if (y != yp) off += plan(y, yp);
      }
    }
    if (off > tol) return false;
  }
  return true;
}

}  // namespace bcot
