#pragma once

#include <stdexcept>
#include <string>

namespace covq {

// Bad caller input: ranges, shapes, unknown configuration keys.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Operands with incompatible mode structure or matrix sizes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A Fock truncation dropped more probability mass than the policy allows.
class CutoffError : public std::runtime_error {
 public:
  CutoffError(const std::string& what, double deficit)
      : std::runtime_error(what), deficit_(deficit) {}
  double deficit() const noexcept { return deficit_; }

 private:
  double deficit_;
};

// A matrix that should be a density operator is not one (negative spectrum,
// non-unit trace, non-Hermitian).
class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative procedure (cutoff refinement, bisection) did not settle.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace covq
