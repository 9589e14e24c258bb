#include "bcot/exact_ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>

#include "bcot/errors.hpp"

namespace bcot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lexicographic cost: mass on forbidden cells first, finite cost second.
struct LexCost {
  double forbidden = 0.0;
  double finite = 0.0;

  LexCost operator-(const LexCost& o) const { return {forbidden - o.forbidden, finite - o.finite}; }
  LexCost operator+(const LexCost& o) const { return {forbidden + o.forbidden, finite + o.finite}; }
};

// Primary components are sums and differences of 0/1 costs, hence exact
// integers; half a unit separates them safely.
constexpr double kForbiddenEps = 0.5;

class TransportSimplex {
 public:
  TransportSimplex(std::span<const double> supply, std::span<const double> demand, std::vector<LexCost> cost,
                   double finite_eps)
      : n_(supply.size()),
        m_(demand.size()),
        cost_(std::move(cost)),
        finite_eps_(finite_eps),
        flow_(n_ * m_, 0.0),
        basic_(n_ * m_, false) {
    northwest_corner(supply, demand);
  }

  void run() {
    const std::size_t cap = 50 * (n_ + m_) * (n_ * m_) + 1000;
    for (std::size_t iter = 0; iter < cap; ++iter) {
      compute_potentials();
      const std::size_t entering = find_entering();
      if (entering == kNone) return;
      pivot(entering);
    }
    throw Error("transport simplex exceeded its pivot cap");
  }

  const std::vector<double>& flow() const { return flow_; }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  std::size_t cell(std::size_t i, std::size_t j) const { return i * m_ + j; }

  // Staircase initial basis with exactly n + m - 1 cells, degenerate zeros included.
  void northwest_corner(std::span<const double> supply, std::span<const double> demand) {
    std::vector<double> s(supply.begin(), supply.end());
    std::vector<double> d(demand.begin(), demand.end());
    std::size_t i = 0;
    std::size_t j = 0;
    while (true) {
      const double amount = std::max(0.0, std::min(s[i], d[j]));
      const std::size_t c = cell(i, j);
      flow_[c] = amount;
      basic_[c] = true;
      basis_.push_back(c);
      s[i] -= amount;
      d[j] -= amount;
      if (i + 1 == n_ && j + 1 == m_) break;
      if (i + 1 == n_) {
        ++j;
      } else if (j + 1 == m_) {
        ++i;
      } else if (s[i] <= d[j]) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  void build_adjacency() {
    adjacency_.assign(n_ + m_, {});
    for (std::size_t c : basis_) {
      adjacency_[c / m_].push_back(c);
      adjacency_[n_ + c % m_].push_back(c);
    }
  }

  std::size_t other_end(std::size_t c, std::size_t node) const {
    const std::size_t row_node = c / m_;
    const std::size_t col_node = n_ + c % m_;
    return node == row_node ? col_node : row_node;
  }

  void compute_potentials() {
    build_adjacency();
    potential_.assign(n_ + m_, LexCost{});
    std::vector<bool> seen(n_ + m_, false);
    std::vector<std::size_t> queue{0};
    seen[0] = true;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t node = queue[head];
      for (std::size_t c : adjacency_[node]) {
        const std::size_t next = other_end(c, node);
        if (seen[next]) continue;
        // u_i + v_j = c_ij on basic cells
        potential_[next] = cost_[c] - potential_[node];
        seen[next] = true;
        queue.push_back(next);
      }
    }
  }

  bool negative(const LexCost& r) const {
    if (r.forbidden < -kForbiddenEps) return true;
    if (r.forbidden > kForbiddenEps) return false;
    return r.finite < -finite_eps_;
  }

  std::size_t find_entering() const {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < m_; ++j) {
        const std::size_t c = cell(i, j);
        if (basic_[c]) continue;
        const LexCost reduced = cost_[c] - potential_[i] - potential_[n_ + j];
        if (negative(reduced)) return c;
      }
    }
    return kNone;
  }

  // Tree path from the entering cell's column node to its row node.
  std::vector<std::size_t> tree_path(std::size_t entering) const {
    const std::size_t start = n_ + entering % m_;
    const std::size_t target = entering / m_;
    std::vector<std::size_t> parent_cell(n_ + m_, kNone);
    std::vector<bool> seen(n_ + m_, false);
    std::vector<std::size_t> queue{start};
    seen[start] = true;
    for (std::size_t head = 0; head < queue.size() && !seen[target]; ++head) {
      const std::size_t node = queue[head];
      for (std::size_t c : adjacency_[node]) {
        const std::size_t next = other_end(c, node);
        if (seen[next]) continue;
        seen[next] = true;
        parent_cell[next] = c;
        queue.push_back(next);
      }
    }
    std::vector<std::size_t> path;
    for (std::size_t node = target; node != start;) {
      const std::size_t c = parent_cell[node];
      path.push_back(c);
      node = other_end(c, node);
    }
    std::reverse(path.begin(), path.end());
    return path;
  }

  void pivot(std::size_t entering) {
    const auto path = tree_path(entering);
    // Cycle: entering (+), path[0] (-), path[1] (+), ...
    double theta = kInf;
    for (std::size_t k = 0; k < path.size(); k += 2) theta = std::min(theta, flow_[path[k]]);
    std::size_t leaving = kNone;
    for (std::size_t k = 0; k < path.size(); k += 2) {
      if (flow_[path[k]] <= theta + 1e-15 && (leaving == kNone || path[k] < leaving)) leaving = path[k];
    }
    theta = flow_[leaving];
    for (std::size_t k = 0; k < path.size(); ++k) {
      double& f = flow_[path[k]];
      f += (k % 2 == 0) ? -theta : theta;
      if (f < 0.0) f = 0.0;
    }
    flow_[entering] = theta;
    flow_[leaving] = 0.0;
    basic_[leaving] = false;
    basic_[entering] = true;
    std::replace(basis_.begin(), basis_.end(), leaving, entering);
  }

  std::size_t n_;
  std::size_t m_;
  std::vector<LexCost> cost_;
  double finite_eps_;
  std::vector<double> flow_;
  std::vector<bool> basic_;
  std::vector<std::size_t> basis_;
  std::vector<std::vector<std::size_t>> adjacency_;
  std::vector<LexCost> potential_;
};

void check_shapes(const Distribution& p, const Distribution& q, std::size_t rows, std::size_t cols) {
  if (p.size() != q.size()) {
    throw DimensionMismatch("marginals have sizes " + std::to_string(p.size()) + " and " + std::to_string(q.size()));
  }
  if (rows != p.size() || cols != q.size()) throw DimensionMismatch("cost table shape does not match marginals");
}

void check_masses(const Distribution& p, const Distribution& q) {
  const double sp = std::accumulate(p.probs().begin(), p.probs().end(), 0.0);
  const double sq = std::accumulate(q.probs().begin(), q.probs().end(), 0.0);
  if (std::abs(sp - sq) > kProbTol) throw InfeasibleMarginals("marginal masses differ");
}

struct LexSolution {
  std::vector<double> flow;
  double forbidden_mass;
};

LexSolution solve_lexicographic(const Distribution& p, const Distribution& q, const CellMask& finite,
                                const CostTable* cost) {
  const std::size_t n = p.size();
  const std::size_t m = q.size();
  std::vector<LexCost> lex(n * m);
  double scale = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (!finite[i][j]) {
        lex[i * m + j] = {1.0, 0.0};
      } else {
        const double c = cost == nullptr ? 0.0 : (*cost)(i, j);
        lex[i * m + j] = {0.0, c};
        scale = std::max(scale, std::abs(c));
      }
    }
  }
  const double finite_eps = 1e-12 * scale * static_cast<double>(n + m);
  TransportSimplex simplex(p.probs(), q.probs(), std::move(lex), finite_eps);
  simplex.run();
  LexSolution out{simplex.flow(), 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (!finite[i][j]) out.forbidden_mass += out.flow[i * m + j];
    }
  }
  return out;
}

CellMask finite_cells(const CostTable& cost) {
  CellMask mask(cost.rows(), std::vector<bool>(cost.cols()));
  for (std::size_t i = 0; i < cost.rows(); ++i) {
    for (std::size_t j = 0; j < cost.cols(); ++j) {
      const double c = cost(i, j);
      if (std::isnan(c) || c < 0.0) {
        throw InvalidArgument("cost table entry (" + std::to_string(i) + "," + std::to_string(j) +
                              ") is negative or NaN");
      }
      mask[i][j] = std::isfinite(c);
    }
  }
  return mask;
}

}  // namespace

double plan_cost(const Matrix& mass, const CostTable& cost) {
  if (mass.rows() != cost.rows() || mass.cols() != cost.cols()) throw DimensionMismatch("plan_cost: shapes differ");
  double total = 0.0;
  for (std::size_t i = 0; i < mass.rows(); ++i) {
    for (std::size_t j = 0; j < mass.cols(); ++j) {
      const double a = mass(i, j);
      const double c = cost(i, j);
      if (std::isinf(c)) {
        if (a > kInfiniteMassTol) return kInf;
        continue;
      }
      total += a * c;
    }
  }
  return total;
}

TransportResult solve_transport(const Distribution& p, const Distribution& q, const CostTable& cost) {
  check_shapes(p, q, cost.rows(), cost.cols());
  check_masses(p, q);
  const CellMask finite = finite_cells(cost);
  const LexSolution sol = solve_lexicographic(p, q, finite, &cost);

  const std::size_t n = p.size();
  Matrix mass(n, n);
  std::copy(sol.flow.begin(), sol.flow.end(), mass.data().begin());
  const double value = sol.forbidden_mass > kInfiniteMassTol ? kInf : plan_cost(mass, cost);
  return TransportResult{value, TransportPlan{std::move(mass), p, q}};
}

double min_infinite_mass(const Distribution& p, const Distribution& q, const CellMask& finite_mask) {
  if (finite_mask.size() != p.size()) throw DimensionMismatch("finite mask has the wrong number of rows");
  for (const auto& r : finite_mask) {
    if (r.size() != q.size()) throw DimensionMismatch("finite mask has a row of the wrong length");
  }
  check_shapes(p, q, p.size(), q.size());
  check_masses(p, q);
  return solve_lexicographic(p, q, finite_mask, nullptr).forbidden_mass;
}

namespace {

// Spanning-tree enumeration over the complete bipartite graph K_{n,n}.
class BasisEnumerator {
 public:
  BasisEnumerator(const Distribution& p, const Distribution& q, const CostTable& cost)
      : n_(p.size()), p_(p), q_(q), cost_(cost) {}

  double run() {
    std::vector<std::size_t> parent(2 * n_);
    std::iota(parent.begin(), parent.end(), 0);
    std::vector<std::size_t> chosen;
    recurse(0, chosen, parent);
    return best_;
  }

 private:
  static std::size_t find(std::vector<std::size_t>& parent, std::size_t x) {
    while (parent[x] != x) x = parent[x];
    return x;
  }

  void recurse(std::size_t next_cell, std::vector<std::size_t>& chosen, const std::vector<std::size_t>& parent) {
    const std::size_t need = 2 * n_ - 1;
    if (chosen.size() == need) {
      evaluate(chosen);
      return;
    }
    const std::size_t cells = n_ * n_;
    if (cells - next_cell < need - chosen.size()) return;
    // Take next_cell if it keeps the edge set acyclic.
    {
      std::vector<std::size_t> with = parent;
      const std::size_t a = find(with, next_cell / n_);
      const std::size_t b = find(with, n_ + next_cell % n_);
      if (a != b) {
        with[a] = b;
        chosen.push_back(next_cell);
        recurse(next_cell + 1, chosen, with);
        chosen.pop_back();
      }
    }
    recurse(next_cell + 1, chosen, parent);
  }

  // Basic solution by leaf peeling; skip infeasible bases.
  void evaluate(const std::vector<std::size_t>& tree) {
    std::vector<double> residual(2 * n_);
    for (std::size_t i = 0; i < n_; ++i) {
      residual[i] = p_[i];
      residual[n_ + i] = q_[i];
    }
    std::vector<std::size_t> degree(2 * n_, 0);
    for (std::size_t c : tree) {
      ++degree[c / n_];
      ++degree[n_ + c % n_];
    }
    std::vector<bool> used(tree.size(), false);
    std::vector<double> flow(tree.size(), 0.0);
    for (std::size_t round = 0; round < tree.size(); ++round) {
      std::size_t pick = tree.size();
      std::size_t leaf = 0;
      for (std::size_t e = 0; e < tree.size() && pick == tree.size(); ++e) {
        if (used[e]) continue;
        const std::size_t r = tree[e] / n_;
        const std::size_t c = n_ + tree[e] % n_;
        if (degree[r] == 1) {
          pick = e;
          leaf = r;
        } else if (degree[c] == 1) {
          pick = e;
          leaf = c;
        }
      }
      const std::size_t r = tree[pick] / n_;
      const std::size_t c = n_ + tree[pick] % n_;
      const std::size_t other = leaf == r ? c : r;
      flow[pick] = residual[leaf];
      residual[other] -= flow[pick];
      residual[leaf] = 0.0;
      --degree[r];
      --degree[c];
      used[pick] = true;
    }
    double objective = 0.0;
    for (std::size_t e = 0; e < tree.size(); ++e) {
      if (flow[e] < -1e-12) return;
      const double c = cost_(tree[e] / n_, tree[e] % n_);
      if (std::isinf(c)) {
        if (flow[e] > kInfiniteMassTol) objective = kInf;
      } else if (flow[e] > 0.0) {
        objective += flow[e] * c;
      }
    }
    best_ = std::min(best_, objective);
  }

  std::size_t n_;
  const Distribution& p_;
  const Distribution& q_;
  const CostTable& cost_;
  double best_ = kInf;
};

}  // namespace

double brute_force_transport(const Distribution& p, const Distribution& q, const CostTable& cost) {
  check_shapes(p, q, cost.rows(), cost.cols());
  if (p.size() > 6) throw TooLarge("brute_force_transport supports at most 6 states");
  finite_cells(cost);
  return BasisEnumerator(p, q, cost).run();
}

}  // namespace bcot
