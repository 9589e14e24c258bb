// Finite-state Markov chain primitives: state spaces, distributions,
// transition kernels, total variation, kernel powers and structural checks.
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "bcot/matrix.hpp"

namespace bcot {

/// Absolute tolerance on probability row sums.
inline constexpr double kProbTol = 1e-9;
/// Entries in [-kNegativeSlack, 0) are treated as rounding noise and clamped.
inline constexpr double kNegativeSlack = 1e-12;

/// Ordered set of distinct state labels; index <-> label is a bijection.
class StateSpace {
 public:
  explicit StateSpace(std::vector<std::string> labels);
  /// Labels "0", "1", ..., "n-1".
  static StateSpace indexed(std::size_t n);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::string& label(std::size_t index) const { return labels_.at(index); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  /// Throws InvalidArgument for unknown labels.
  std::size_t index_of(const std::string& label) const;
  bool contains(const std::string& label) const { return index_.count(label) != 0; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Probability vector over an indexed state space.
class Distribution {
 public:
  /// Validates (entries >= -1e-12, sum within 1e-9 of 1) and renormalizes.
  explicit Distribution(std::vector<double> probs);
  static Distribution point_mass(std::size_t n, std::size_t at);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }
  operator std::span<const double>() const noexcept { return probs_; }  // NOLINT(google-explicit-constructor)

 private:
  std::vector<double> probs_;
};

/// Row-stochastic square matrix. Construct through validate_kernel.
class TransitionKernel {
 public:
  std::size_t size() const noexcept { return matrix_.rows(); }
  std::span<const double> row(std::size_t x) const { return matrix_.row(x); }
  double operator()(std::size_t x, std::size_t y) const { return matrix_(x, y); }
  const Matrix& matrix() const noexcept { return matrix_; }

  bool operator==(const TransitionKernel&) const = default;

 private:
  explicit TransitionKernel(Matrix m) : matrix_(std::move(m)) {}
  friend TransitionKernel validate_kernel(const Matrix&);
  Matrix matrix_;
};

struct ChainSpec {
  StateSpace space;
  TransitionKernel kernel;
  std::size_t initial;
};

/// Checks squareness, clamps entries in [-1e-12, 0) to zero, checks row sums
/// within 1e-9 and renormalizes each row exactly.
TransitionKernel validate_kernel(const Matrix& matrix);
TransitionKernel validate_kernel(const std::vector<std::vector<double>>& rows);

ChainSpec make_chain(StateSpace space, TransitionKernel kernel, std::size_t initial);

/// Half the L1 distance between two probability vectors.
double tv_distance(std::span<const double> p, std::span<const double> q);

/// Row x of P^k; k = 0 gives the point mass at x.
Distribution k_step_distribution(const TransitionKernel& kernel, std::size_t x, std::size_t k);

/// P^k as a kernel (repeated squaring).
TransitionKernel kernel_power(const TransitionKernel& kernel, std::size_t k);

/// Maximum total-variation distance between two rows of the kernel.
double doeblin_coefficient(const TransitionKernel& kernel);

struct StructureFlags {
  bool irreducible = false;
  bool aperiodic = false;
};

/// Graph structure of the strictly positive entries. Aperiodicity is judged
/// per strongly connected component; components without any cycle carry no
/// period and are ignored.
StructureFlags structure_flags(const TransitionKernel& kernel);

}  // namespace bcot
