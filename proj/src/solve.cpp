#include "modesign/solve.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "barrier.hpp"
#include "modesign/errors.hpp"

namespace modesign {

namespace {

using detail::BarrierConstraint;
using detail::BarrierOutcome;
using detail::BarrierSetup;

constexpr double kFeasibilityThreshold = 1e-8;
constexpr double kSmoothingFloor = 1e-9;

double true_phi(const MultiObjectiveProblem& p, std::size_t k,
                const Eigen::Ref<const Eigen::VectorXd>& w) {
  return criterion_value(p.grid, p.specs[k], w, k);
}

double lambda_max(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

// Chooses the E smoothing scale so that every E-constraint keeps at least
// half of its slack at the start point.
void configure_smoothing(const MultiObjectiveProblem& p, BarrierSetup& setup) {
  std::vector<std::size_t> used;
  if (setup.objective) used.push_back(*setup.objective);
  for (const auto& c : setup.constraints) used.push_back(c.criterion);
  double scale = 0.0;
  for (std::size_t k : used) {
    if (p.specs[k].kind != CriterionKind::E) continue;
    scale = std::max(scale, lambda_max(information_matrix(p.grid, p.specs[k].model, setup.w0)));
  }
  if (scale == 0.0) return;
  double e_scale = scale;
  for (const auto& c : setup.constraints) {
    const auto& spec = p.specs[c.criterion];
    const int q = p.q_of(c.criterion);
    if (spec.kind != CriterionKind::E || q < 2) continue;
    const double phi = true_phi(p, c.criterion, setup.w0);
    double slack = 0.0;
    switch (c.form) {
      case BarrierConstraint::Form::Fixed:
        slack = c.bound - phi;
        break;
      case BarrierConstraint::Form::FixedMinusAux:
        slack = c.bound + setup.tau0 - phi;
        break;
      case BarrierConstraint::Form::Reciprocal:
        slack = detail::h_at_reciprocal(spec.kind, setup.tau0, c.min_phi, q) - phi;
        break;
    }
    if (!(slack > 0.0)) throw ContractViolation("E-constraint is not strictly feasible at start");
    e_scale = std::min(e_scale, slack / (2.0 * std::log(static_cast<double>(q)) * setup.mu_start));
  }
  setup.e_scale = e_scale;
  setup.e_floor = kSmoothingFloor * scale;
}

BarrierSetup base_setup(const MultiObjectiveProblem& p, int budget) {
  BarrierSetup s;
  s.tol = p.solver_tol;
  s.max_newton = budget;
  s.w0 = Design::uniform(p.grid.size()).weights();
  return s;
}

SolveStatus status_of(const BarrierOutcome& o, double tol) {
  if (o.hit_cap || !(o.kkt_residual <= tol)) return SolveStatus::MaxIterations;
  return SolveStatus::Converged;
}

void require_nonsingular_start(const MultiObjectiveProblem& p, std::size_t k,
                               const Eigen::VectorXd& w0) {
  if (p.specs[k].kind == CriterionKind::E) return;
  // phi_value throws SingularInformationMatrix tagged with k.
  (void)true_phi(p, k, w0);
}

}  // namespace

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Single:
      return "single";
    case ProblemKind::Constrained:
      return "constrained";
    case ProblemKind::Maximin:
      return "maximin";
  }
  return "?";
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged:
      return "Converged";
    case SolveStatus::Infeasible:
      return "Infeasible";
    case SolveStatus::MaxIterations:
      return "MaxIterations";
  }
  return "?";
}

void MultiObjectiveProblem::validate() const {
  if (specs.empty()) throw ContractViolation("problem has no criteria");
  for (std::size_t k = 0; k < specs.size(); ++k) {
    if (specs[k].model >= grid.num_models()) {
      throw ContractViolation("criterion " + std::to_string(k) + " refers to an unknown model");
    }
    specs[k].validate(q_of(k));
  }
  if (!min_phi.empty() && min_phi.size() != specs.size()) {
    throw ContractViolation("min_phi cache has the wrong size");
  }
  switch (kind) {
    case ProblemKind::Single:
      if (single_index >= specs.size()) throw ContractViolation("single criterion index out of range");
      break;
    case ProblemKind::Constrained:
      if (specs.size() < 2) throw ContractViolation("a constrained problem needs K >= 2 criteria");
      if (bounds.size() != specs.size() - 1) {
        throw ContractViolation("constrained problem needs " + std::to_string(specs.size() - 1) +
                                " efficiency bounds, got " + std::to_string(bounds.size()));
      }
      for (double m : bounds) {
        if (!(m > 0.0 && m < 1.0)) throw ContractViolation("efficiency bounds must lie in (0, 1)");
      }
      break;
    case ProblemKind::Maximin:
      break;
  }
  if (!(delta > 0.0)) throw ContractViolation("delta must be positive");
  if (!(solver_tol > 0.0)) throw ContractViolation("solver tolerance must be positive");
  if (max_iterations < 1) throw ContractViolation("max_iterations must be positive");
}

double MultiObjectiveProblem::min_phi_of(std::size_t k) const {
  if (k >= min_phi.size() || !min_phi[k]) {
    throw ContractViolation("optimal value of criterion " + std::to_string(k) +
                            " is not cached; run presolve first");
  }
  return *min_phi[k];
}

double MultiObjectiveProblem::bound_value(std::size_t k) const {
  if (k == 0 || k > bounds.size()) throw ContractViolation("bound index out of range");
  return h_of_m(specs[k].kind, bounds[k - 1], min_phi_of(k), q_of(k));
}

std::vector<double> efficiencies(const MultiObjectiveProblem& problem,
                                 const Eigen::Ref<const Eigen::VectorXd>& w) {
  std::vector<double> out;
  for (std::size_t k = 0; k < problem.specs.size(); ++k) {
    out.push_back(efficiency_from_value(problem.specs[k].kind, problem.q_of(k),
                                        true_phi(problem, k, w), problem.min_phi_of(k)));
  }
  return out;
}

SolveResult solve_single(MultiObjectiveProblem& problem, std::size_t k) {
  problem.validate();
  if (k >= problem.specs.size()) throw ContractViolation("criterion index out of range");
  BarrierSetup setup = base_setup(problem, problem.max_iterations);
  require_nonsingular_start(problem, k, setup.w0);
  setup.objective = k;
  configure_smoothing(problem, setup);
  const BarrierOutcome o = detail::run_barrier(problem.grid, problem.specs, setup);

  SolveResult r;
  r.design = Design(o.w, problem.support_threshold);
  r.objective = true_phi(problem, k, o.w);
  r.status = status_of(o, problem.solver_tol);
  r.iterations = o.iterations;
  r.kkt_residual = o.kkt_residual;
  r.stage_objectives = o.stage_objectives;
  if (problem.min_phi.size() != problem.specs.size()) problem.min_phi.resize(problem.specs.size());
  problem.min_phi[k] = r.objective;
  return r;
}

std::vector<std::optional<SolveResult>> presolve(MultiObjectiveProblem& problem,
                                                 unsigned threads) {
  problem.validate();
  const std::size_t K = problem.specs.size();
  if (problem.min_phi.size() != K) problem.min_phi.resize(K);
  std::vector<std::size_t> todo;
  for (std::size_t k = 0; k < K; ++k) {
    if (!problem.min_phi[k]) todo.push_back(k);
  }
  std::vector<std::optional<SolveResult>> results(K);
  std::vector<std::exception_ptr> errors(K);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < todo.size(); j = next++) {
      const std::size_t k = todo[j];
      try {
        results[k] = solve_single(problem, k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(todo.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

SolveResult solve_constrained(const MultiObjectiveProblem& problem) {
  problem.validate();
  if (problem.kind != ProblemKind::Constrained) {
    throw ContractViolation("solve_constrained needs a constrained problem");
  }
  const std::size_t K = problem.specs.size();
  std::vector<double> h(K, 0.0);
  for (std::size_t k = 1; k < K; ++k) h[k] = problem.bound_value(k);

  SolveResult r;
  double h_scale = 1.0;
  for (std::size_t k = 1; k < K; ++k) h_scale = std::max(h_scale, std::abs(h[k]));
  const Eigen::VectorXd uniform = Design::uniform(problem.grid.size()).weights();
  for (std::size_t k = 0; k < K; ++k) require_nonsingular_start(problem, k, uniform);
  double s0 = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < K; ++k) s0 = std::max(s0, true_phi(problem, k, uniform) - h[k]);
  Eigen::VectorXd start = uniform;

  // Phase 1: minimize s subject to Phi_k - h_k < s.
  int used = 0;
  if (s0 >= 0.0) {
    BarrierSetup p1 = base_setup(problem, problem.max_iterations);
    p1.has_aux = true;
    p1.tau0 = s0 + std::max(1.0, std::abs(s0));
    for (std::size_t k = 1; k < K; ++k) {
      p1.constraints.push_back({k, BarrierConstraint::Form::FixedMinusAux, h[k], 0.0});
    }
    configure_smoothing(problem, p1);
    const double margin = 1e-3 * h_scale;
    bool infeasible = false;
    p1.monitor = [&](const detail::BarrierState& st) {
      if (st.tau < -margin || (st.centered && st.tau < 0.0)) return detail::StageDecision::Stop;
      if (st.centered && st.tau - st.gap > kFeasibilityThreshold) {
        infeasible = true;
        return detail::StageDecision::Stop;
      }
      return detail::StageDecision::Continue;
    };
    const BarrierOutcome o = detail::run_barrier(problem.grid, problem.specs, p1);
    used = o.iterations;
    const double gap = static_cast<double>(problem.grid.size() + K - 1) * o.mu;
    if (infeasible || (!o.stopped_by_monitor && o.tau - gap > kFeasibilityThreshold)) {
      r.design = Design(o.w, problem.support_threshold);
      r.objective = o.tau;
      r.status = SolveStatus::Infeasible;
      r.iterations = used;
      r.kkt_residual = o.kkt_residual;
      return r;
    }
    if (o.hit_cap) {
      r.design = Design(o.w, problem.support_threshold);
      r.objective = true_phi(problem, 0, o.w);
      r.status = SolveStatus::MaxIterations;
      r.iterations = used;
      r.kkt_residual = o.kkt_residual;
      return r;
    }
    if (!(o.tau < 0.0)) {
      // Feasible set has (numerically) empty interior; the phase-1 point is
      // the only candidate.
      r.design = Design(o.w, problem.support_threshold);
      r.objective = true_phi(problem, 0, o.w);
      r.status = SolveStatus::Converged;
      r.iterations = used;
      r.kkt_residual = o.kkt_residual;
      return r;
    }
    start = o.w;
  }

  BarrierSetup p2 = base_setup(problem, std::max(1, problem.max_iterations - used));
  p2.w0 = start;
  p2.objective = 0;
  for (std::size_t k = 1; k < K; ++k) {
    p2.constraints.push_back({k, BarrierConstraint::Form::Fixed, h[k], 0.0});
  }
  configure_smoothing(problem, p2);
  const BarrierOutcome o = detail::run_barrier(problem.grid, problem.specs, p2);
  r.design = Design(o.w, problem.support_threshold);
  r.objective = true_phi(problem, 0, o.w);
  r.status = status_of(o, problem.solver_tol);
  r.iterations = used + o.iterations;
  r.kkt_residual = o.kkt_residual;
  r.stage_objectives = o.stage_objectives;
  return r;
}

SolveResult solve_maximin(const MultiObjectiveProblem& problem) {
  problem.validate();
  if (problem.kind != ProblemKind::Maximin) {
    throw ContractViolation("solve_maximin needs a maximin problem");
  }
  const std::size_t K = problem.specs.size();
  BarrierSetup setup = base_setup(problem, problem.max_iterations);
  for (std::size_t k = 0; k < K; ++k) require_nonsingular_start(problem, k, setup.w0);
  const auto eff0 = efficiencies(problem, setup.w0);
  const double worst = *std::min_element(eff0.begin(), eff0.end());
  if (!(worst > 0.0)) throw ContractViolation("uniform design has zero efficiency");
  setup.has_aux = true;
  setup.aux_lower = 0.0;
  setup.tau0 = 2.0 / worst;
  for (std::size_t k = 0; k < K; ++k) {
    setup.constraints.push_back(
        {k, BarrierConstraint::Form::Reciprocal, 0.0, problem.min_phi_of(k)});
  }
  configure_smoothing(problem, setup);
  const BarrierOutcome o = detail::run_barrier(problem.grid, problem.specs, setup);

  SolveResult r;
  r.design = Design(o.w, problem.support_threshold);
  r.t_star = o.tau;
  r.objective = o.tau;
  r.status = status_of(o, problem.solver_tol);
  r.iterations = o.iterations;
  r.kkt_residual = o.kkt_residual;
  r.stage_objectives = o.stage_objectives;
  return r;
}

SolveResult solve(MultiObjectiveProblem& problem, unsigned threads) {
  problem.validate();
  if (problem.kind == ProblemKind::Single) return solve_single(problem, problem.single_index);
  presolve(problem, threads);
  if (problem.kind == ProblemKind::Constrained) return solve_constrained(problem);
  return solve_maximin(problem);
}

}  // namespace modesign
