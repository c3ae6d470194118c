#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace modesign {

/// min c^T x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x_j >= 0 or free.
struct LinearProgram {
  enum class Bound { NonNegative, Free };

  Eigen::VectorXd objective;
  Eigen::MatrixXd A_ub;
  Eigen::VectorXd b_ub;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  std::vector<Bound> bounds;  // empty: every variable nonnegative

  Eigen::Index num_vars() const noexcept { return objective.size(); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

std::string to_string(LpStatus status);

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd x;            // Optimal only
  double objective_value = 0.0;
  double phase1_residual = 0.0;  // sum of artificials at the end of phase 1
  /// Simplex multipliers; c^T x = b_ub^T y_ub + b_eq^T y_eq at an optimum.
  Eigen::VectorXd duals_ub;
  Eigen::VectorXd duals_eq;
  int pivots = 0;
};

/// Dense two-phase primal simplex. Throws std::invalid_argument on
/// inconsistent dimensions or non-finite data.
LpResult lp_solve(const LinearProgram& lp);

}  // namespace modesign
