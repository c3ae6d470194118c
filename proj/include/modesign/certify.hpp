#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "modesign/solve.hpp"

namespace modesign {

enum class Verdict { Certified, NotCertified };

std::string to_string(Verdict verdict);

struct Certificate {
  Verdict verdict = Verdict::NotCertified;
  /// Multipliers: (eta_2..eta_K) for constrained, (eta_1..eta_K) for
  /// maximin, (1) for a single criterion. Empty if the LP had no solution.
  Eigen::VectorXd eta;
  /// Per criterion; nonempty only for E-criteria with r* > 1 whose
  /// eigenvector weights entered the LP.
  std::vector<Eigen::VectorXd> a_weights;
  /// Per criterion multiplicity of lambda_min (0 for non-E criteria).
  std::vector<int> r_star;
  double delta = 1e-4;
  /// max_i of the combined dispersion curve (the stationarity row LHS).
  double max_stationarity_residual = 0.0;
  /// |eta_k (Phi_k - h_k)| for every multiplier, aligned with eta.
  std::vector<double> complementarity_residuals;
  /// d_{phi_k}(u_i, w) per criterion; E uses the eigen-dispersion with the
  /// certificate's a (uniform a when none was found).
  std::vector<Eigen::VectorXd> curves;
  /// sum_k coefficient_k * curves[k].
  Eigen::VectorXd combined;
  /// Smallest extra slack on top of delta that makes the LP feasible; 0 when
  /// Certified.
  double excess = 0.0;
  bool design_feasible = true;
  double lp_objective = 0.0;
  std::vector<std::string> notes;
};

/// Equivalence-theorem check for one criterion; E handles r* > 1 with an
/// LP over the eigenvector weights.
Certificate verify_single(const CriterionSpec& spec, const DesignGrid& grid, const Design& w,
                          double delta, std::size_t criterion_index = 0);

/// LP for the efficiency-constrained problem. An infeasible w yields
/// NotCertified with design_feasible = false.
Certificate certify_constrained(const MultiObjectiveProblem& problem, const Design& w,
                                double delta);

/// LP for the maximin problem at (w, t).
Certificate certify_maximin(const MultiObjectiveProblem& problem, const Design& w, double t,
                            double delta);

/// Dispatches on problem.kind. A missing t for maximin is taken as
/// 1 / min_k Eff_k(w).
Certificate certify(const MultiObjectiveProblem& problem, const Design& w,
                    std::optional<double> t, double delta);

/// N x (K + 1): the per-criterion curves followed by the combined curve.
Eigen::MatrixXd dispersion_report(const MultiObjectiveProblem& problem, const Design& w,
                                  const Certificate& certificate);

}  // namespace modesign
