#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace modesign {

/// Raised when a caller breaks a documented precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A regression model could not be evaluated at a design point
/// (overflowing exponentials, division by zero, ...).
class ModelEvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The information matrix is not positive definite where a criterion needs
/// its inverse.
class SingularInformationMatrix : public std::runtime_error {
 public:
  SingularInformationMatrix(double lambda_min, std::size_t criterion_index)
      : std::runtime_error("singular information matrix for criterion " +
                           std::to_string(criterion_index) +
                           " (lambda_min = " + std::to_string(lambda_min) + ")"),
        lambda_min_(lambda_min),
        criterion_index_(criterion_index) {}

  double lambda_min() const noexcept { return lambda_min_; }
  std::size_t criterion_index() const noexcept { return criterion_index_; }

 private:
  double lambda_min_;
  std::size_t criterion_index_;
};

/// Malformed or inconsistent problem description.
class ProblemFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace modesign
