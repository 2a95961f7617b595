#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace semidiag {

/// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Input data violates a precondition (shape, sign, ordering, missing cell).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A series or iterative evaluation failed to converge within its cap.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Singular or rank-deficient linear system.
class LinAlgError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Model fitting failed (non-convergence, optimizer breakdown).
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Logistic regression coefficients diverge because the classes are separable.
class SeparationError : public FitError {
 public:
  using FitError::FitError;
};

}  // namespace semidiag
