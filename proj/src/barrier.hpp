#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "modesign/criteria.hpp"

namespace modesign::detail {

/// Value, gradient and Hessian in w of one criterion. E uses the softmin
/// surrogate -softmin_mu(lambda(M)) instead of -lambda_min.
struct TermEval {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

enum class Want { Value, Gradient, Hessian };

/// nullopt when the information matrix is not positive definite enough for
/// a D/A/c/L criterion.
std::optional<TermEval> evaluate_term(const DesignGrid& grid, const CriterionSpec& spec,
                                      const Eigen::VectorXd& w, double mu_e, Want want);

/// Smooth convex constraint g(w, tau) < 0 built from one criterion.
struct BarrierConstraint {
  enum class Form {
    Fixed,         // Phi_k(w) - bound
    Reciprocal,    // Phi_k(w) - h_k(1/tau)
    FixedMinusAux  // Phi_k(w) - bound - tau
  };
  std::size_t criterion = 0;
  Form form = Form::Fixed;
  double bound = 0.0;
  double min_phi = 0.0;  // Reciprocal only
};

struct BarrierState {
  const Eigen::VectorXd& w;
  double tau;
  double mu;
  double gap;     // duality gap bound m * mu at a centered point
  bool centered;  // true right after a centering stage finished
};

enum class StageDecision { Continue, Stop };

struct BarrierSetup {
  /// Criterion minimized; nullopt minimizes the auxiliary variable tau.
  std::optional<std::size_t> objective;
  std::vector<BarrierConstraint> constraints;
  bool has_aux = false;
  double aux_lower = -std::numeric_limits<double>::infinity();  // tau > aux_lower
  Eigen::VectorXd w0;
  double tau0 = 0.0;
  double tol = 1e-7;
  int max_newton = 500;
  double mu_start = 1.0;
  double mu_factor = 0.2;
  double mu_min = 1e-10;
  /// Surrogate smoothing is mu_e = e_scale * mu, floored at e_floor.
  double e_scale = 1.0;
  double e_floor = 0.0;
  std::function<StageDecision(const BarrierState&)> monitor;
};

struct BarrierOutcome {
  Eigen::VectorXd w;
  double tau = 0.0;
  double objective = 0.0;  // f0 at the final iterate (surrogate for E)
  int iterations = 0;
  bool hit_cap = false;
  bool stopped_by_monitor = false;
  double mu = 0.0;
  double kkt_residual = 0.0;
  std::vector<double> stage_objectives;
};

/// Primal log-barrier path following on {w > 0, sum w = 1} (plus the
/// optional free variable tau) with Newton centering and backtracking.
BarrierOutcome run_barrier(const DesignGrid& grid, const std::vector<CriterionSpec>& specs,
                           const BarrierSetup& setup);

/// h(1/t) without the m <= 1 restriction of h_of_m.
double h_at_reciprocal(CriterionKind kind, double t, double min_phi, int q);

/// Second derivative of h(1/t) in t.
double h_reciprocal_second_derivative(CriterionKind kind, double t, double min_phi, int q);

}  // namespace modesign::detail
