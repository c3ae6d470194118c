#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "modesign/criteria.hpp"
#include "modesign/grid.hpp"

namespace modesign {

enum class ProblemKind { Single, Constrained, Maximin };

std::string to_string(ProblemKind kind);

struct MultiObjectiveProblem {
  DesignGrid grid;
  std::vector<CriterionSpec> specs;
  ProblemKind kind = ProblemKind::Single;
  std::size_t single_index = 0;        // Single
  std::vector<double> bounds;          // Constrained: m_2..m_K, size K - 1
  std::vector<std::optional<double>> min_phi;  // filled by presolve
  double delta = 1e-4;
  double solver_tol = 1e-7;
  int max_iterations = 500;
  double support_threshold = Design::kDefaultSupportThreshold;

  std::size_t num_criteria() const noexcept { return specs.size(); }
  /// Checks spec/model consistency and the bounds; throws ContractViolation.
  void validate() const;
  /// Cached optimum of criterion k; throws if presolve has not filled it.
  double min_phi_of(std::size_t k) const;
  /// h_k(m_k) for a constrained problem, k >= 1.
  double bound_value(std::size_t k) const;
  int q_of(std::size_t k) const { return grid.model(specs.at(k).model).num_params(); }
};

enum class SolveStatus { Converged, Infeasible, MaxIterations };

std::string to_string(SolveStatus status);

struct SolveResult {
  Design design;
  double t_star = 0.0;  // maximin only
  double objective = 0.0;
  SolveStatus status = SolveStatus::MaxIterations;
  int iterations = 0;
  double kkt_residual = 0.0;
  /// f0 at each centered point along the barrier path.
  std::vector<double> stage_objectives;
};

/// Minimizes Phi_k over the simplex and stores the optimum in
/// problem.min_phi[k].
SolveResult solve_single(MultiObjectiveProblem& problem, std::size_t k);

/// Runs solve_single for every criterion whose optimum is not cached yet,
/// on up to `threads` worker threads. Returns the results by criterion
/// (nullopt for criteria already cached).
std::vector<std::optional<SolveResult>> presolve(MultiObjectiveProblem& problem,
                                                 unsigned threads = 1);

/// Minimizes Phi_1 subject to Eff_k >= m_k, k = 2..K. Needs every min_phi.
SolveResult solve_constrained(const MultiObjectiveProblem& problem);

/// Minimizes t subject to Phi_k <= h_k(1/t) for all k. Needs every min_phi.
SolveResult solve_maximin(const MultiObjectiveProblem& problem);

/// Presolves as needed, then dispatches on problem.kind.
SolveResult solve(MultiObjectiveProblem& problem, unsigned threads = 1);

/// Efficiency of w for every criterion (min_phi must be cached).
std::vector<double> efficiencies(const MultiObjectiveProblem& problem,
                                 const Eigen::Ref<const Eigen::VectorXd>& w);

}  // namespace modesign
