// Exception types raised by the solver library.
#pragma once

#include <stdexcept>
#include <string>

namespace bcot {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input validation
class NonSquare : public Error { using Error::Error; };
class NegativeEntry : public Error { using Error::Error; };
class RowSumViolation : public Error { using Error::Error; };
class DimensionMismatch : public Error { using Error::Error; };
class InvalidArgument : public Error { using Error::Error; };

// Transport solver
class InfeasibleMarginals : public Error { using Error::Error; };
class TooLarge : public Error { using Error::Error; };

// Couplings and dynamic programming
class InvalidCoupling : public Error { using Error::Error; };
class SingularSystem : public Error { using Error::Error; };

// Quantities that do not exist for the given input
class NoContraction : public Error { using Error::Error; };
class NotTwoState : public Error { using Error::Error; };
class NotCouplingInstance : public Error { using Error::Error; };
class InfiniteProxy : public Error { using Error::Error; };
class TruncationUnsafe : public Error { using Error::Error; };

}  // namespace bcot
