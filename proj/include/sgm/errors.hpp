#pragma once

#include <stdexcept>
#include <string>

namespace sgm {

// Argument/contract violations (dimension mismatches, bad parameters).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical breakdown (failed factorization, non-finite values).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Evaluation outside an objective's domain (vanishing denominator).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Projection inner solver did not reach its KKT tolerance.
class ProjectionFailure : public std::runtime_error {
 public:
  ProjectionFailure(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Line search: the supplied direction is not a descent direction.
class NonDescentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Line search: backtracking exceeded its iteration cap.
class BacktrackExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Diagnostics: not enough usable data points for a fit.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sgm
