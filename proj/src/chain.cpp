#include "bcot/chain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bcot/errors.hpp"

namespace bcot {

namespace {

// Clamps rounding noise, checks the sum and renormalizes in place.
// `what` prefixes diagnostics, e.g. "row 3".
void normalize_probabilities(std::span<double> probs, const std::string& what) {
  double sum = 0.0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    double& v = probs[j];
    if (!std::isfinite(v)) {
      throw InvalidArgument(what + ": entry " + std::to_string(j) + " is not finite");
    }
    if (v < -kNegativeSlack) {
      std::ostringstream msg;
      msg << what << ": entry " << j << " is negative (" << v << ")";
      throw NegativeEntry(msg.str());
    }
    if (v < 0.0) v = 0.0;
    sum += v;
  }
  if (std::abs(sum - 1.0) > kProbTol) {
    std::ostringstream msg;
    msg.precision(17);
    msg << what << " sums to " << sum << ", expected 1";
    throw RowSumViolation(msg.str());
  }
  for (double& v : probs) v /= sum;
}

}  // namespace

StateSpace::StateSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw InvalidArgument("state space must contain at least one state");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!index_.emplace(labels_[i], i).second) {
      throw InvalidArgument("duplicate state label '" + labels_[i] + "'");
    }
  }
}

StateSpace StateSpace::indexed(std::size_t n) {
  std::vector<std::string> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = std::to_string(i);
  return StateSpace(std::move(labels));
}

std::size_t StateSpace::index_of(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) throw InvalidArgument("unknown state label '" + label + "'");
  return it->second;
}

Distribution::Distribution(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw InvalidArgument("distribution over an empty state space");
  normalize_probabilities(probs_, "distribution");
}

Distribution Distribution::point_mass(std::size_t n, std::size_t at) {
  if (at >= n) throw InvalidArgument("point mass index out of range");
  std::vector<double> p(n, 0.0);
  p[at] = 1.0;
  return Distribution(std::move(p));
}

TransitionKernel validate_kernel(const Matrix& matrix) {
  if (!matrix.square()) {
    throw NonSquare("transition matrix is " + std::to_string(matrix.rows()) + "x" +
                    std::to_string(matrix.cols()));
  }
  if (matrix.rows() == 0) throw NonSquare("transition matrix is empty");
  Matrix m = matrix;
  for (std::size_t i = 0; i < m.rows(); ++i) normalize_probabilities(m.row(i), "row " + std::to_string(i));
  return TransitionKernel(std::move(m));
}

TransitionKernel validate_kernel(const std::vector<std::vector<double>>& rows) {
  for (const auto& r : rows) {
    if (r.size() != rows.size()) {
      throw NonSquare("transition matrix has " + std::to_string(rows.size()) + " rows but a row of length " +
                      std::to_string(r.size()));
    }
  }
  return validate_kernel(Matrix::from_rows(rows));
}

ChainSpec make_chain(StateSpace space, TransitionKernel kernel, std::size_t initial) {
  if (space.size() != kernel.size()) throw DimensionMismatch("kernel size differs from state space size");
  if (initial >= space.size()) throw InvalidArgument("initial state out of range");
  return ChainSpec{std::move(space), std::move(kernel), initial};
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw DimensionMismatch("tv_distance: sizes " + std::to_string(p.size()) + " and " + std::to_string(q.size()));
  }
  double l1 = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) l1 += std::abs(p[i] - q[i]);
  return std::min(1.0, 0.5 * l1);
}

TransitionKernel kernel_power(const TransitionKernel& kernel, std::size_t k) {
  Matrix result = Matrix::identity(kernel.size());
  Matrix base = kernel.matrix();
  while (k > 0) {
    if (k & 1U) result = multiply(result, base);
    k >>= 1U;
    if (k > 0) base = multiply(base, base);
  }
  return validate_kernel(result);
}

Distribution k_step_distribution(const TransitionKernel& kernel, std::size_t x, std::size_t k) {
  const std::size_t n = kernel.size();
  if (x >= n) throw InvalidArgument("k_step_distribution: state out of range");
  if (k > 64) {
    const auto power = kernel_power(kernel, k);
    return Distribution(std::vector<double>(power.row(x).begin(), power.row(x).end()));
  }
  std::vector<double> current(n, 0.0);
  current[x] = 1.0;
  std::vector<double> next(n);
  for (std::size_t step = 0; step < k; ++step) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (current[i] == 0.0) continue;
      const auto r = kernel.row(i);
      for (std::size_t j = 0; j < n; ++j) next[j] += current[i] * r[j];
    }
    current.swap(next);
  }
  return Distribution(std::move(current));
}

double doeblin_coefficient(const TransitionKernel& kernel) {
  double worst = 0.0;
  const std::size_t n = kernel.size();
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = x + 1; y < n; ++y) worst = std::max(worst, tv_distance(kernel.row(x), kernel.row(y)));
  }
  return worst;
}

namespace {

// Iterative Tarjan; returns component id per vertex.
std::vector<std::size_t> strongly_connected_components(const std::vector<std::vector<std::size_t>>& adj,
                                                       std::size_t& component_count) {
  const std::size_t n = adj.size();
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnset), low(n, 0), comp(n, kUnset);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::size_t counter = 0;
  component_count = 0;

  struct Frame {
    std::size_t v;
    std::size_t next_edge;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnset) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.next_edge < adj[f.v].size()) {
        const std::size_t w = adj[f.v][f.next_edge++];
        if (index[w] == kUnset) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      const std::size_t v = f.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      if (low[v] == index[v]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = component_count;
        } while (w != v);
        ++component_count;
      }
    }
  }
  return comp;
}

}  // namespace

StructureFlags structure_flags(const TransitionKernel& kernel) {
  const std::size_t n = kernel.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (kernel(i, j) > 0.0) adj[i].push_back(j);
    }
  }
  std::size_t count = 0;
  const auto comp = strongly_connected_components(adj, count);

  StructureFlags flags;
  flags.irreducible = count == 1;
  flags.aperiodic = true;

  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> level(n, kUnset);
  for (std::size_t c = 0; c < count; ++c) {
    // BFS levels inside the component; the period is the gcd of
    // level[u] + 1 - level[v] over all internal edges u -> v.
    std::size_t root = kUnset;
    for (std::size_t v = 0; v < n && root == kUnset; ++v) {
      if (comp[v] == c) root = v;
    }
    std::vector<std::size_t> queue{root};
    level[root] = 0;
    std::size_t period = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t u = queue[head];
      for (std::size_t v : adj[u]) {
        if (comp[v] != c) continue;
        if (level[v] == kUnset) {
          level[v] = level[u] + 1;
          queue.push_back(v);
        } else {
          const auto diff = static_cast<long long>(level[u]) + 1 - static_cast<long long>(level[v]);
          period = std::gcd(period, static_cast<std::size_t>(diff < 0 ? -diff : diff));
        }
      }
    }
    if (period > 1) flags.aperiodic = false;
  }
  return flags;
}

}  // namespace bcot
