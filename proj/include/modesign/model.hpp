#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace modesign {

enum class ModelKind {
  Linear,           // user basis of monomials, linear in theta
  Compartment4,     // theta1 exp(-theta2 x) + theta3 exp(-theta4 x)
  Emax3,            // theta1 + theta2 x / (theta3 + x)
  Logistic4,        // theta1 + theta2 / (1 + exp((theta3 - x) / theta4))
  PolyInteraction,  // theta . (1, x1, x2, x1 x2, x2^2)
};

std::string to_string(ModelKind kind);

/// A regression function f(x, theta) together with the nominal parameter
/// value theta* at which its gradient in theta is taken.
///
/// Models that are linear in theta ignore theta* when computing gradients.
class RegressionModel {
 public:
  using Monomial = std::vector<int>;  // one exponent per design coordinate

  /// Sum of theta_j * prod_d x_d^{e_jd}; every monomial must have the same
  /// number of exponents (the design dimension).
  static RegressionModel linear(std::vector<Monomial> basis);
  static RegressionModel compartment4(Eigen::Vector4d theta);
  static RegressionModel emax3(Eigen::Vector3d theta);
  static RegressionModel logistic4(Eigen::Vector4d theta);
  static RegressionModel poly_interaction();

  ModelKind kind() const noexcept { return kind_; }
  /// Number of parameters q.
  int num_params() const noexcept;
  /// Number of design coordinates p.
  int dimension() const noexcept { return dimension_; }
  const Eigen::VectorXd& theta() const noexcept { return theta_; }
  const std::vector<Monomial>& basis() const noexcept { return basis_; }
  bool linear_in_theta() const noexcept;

  /// f(x, theta). Used by tests and finite-difference checks.
  double response(std::span<const double> x, const Eigen::VectorXd& theta) const;

  /// Analytic gradient of f in theta at theta*. Throws ModelEvaluationError
  /// when an entry is not finite.
  Eigen::VectorXd gradient(std::span<const double> x) const;

 private:
  RegressionModel(ModelKind kind, Eigen::VectorXd theta, int dimension)
      : kind_(kind), theta_(std::move(theta)), dimension_(dimension) {}

  ModelKind kind_;
  Eigen::VectorXd theta_;
  int dimension_;
  std::vector<Monomial> basis_;
};

/// z_f(x): the q-vector of partial derivatives of f in theta at theta*.
Eigen::VectorXd gradient_vector(const RegressionModel& model, std::span<const double> point);

}  // namespace modesign
