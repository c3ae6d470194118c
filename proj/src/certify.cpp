#include "modesign/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "barrier.hpp"
#include "modesign/errors.hpp"
#include "modesign/lp.hpp"

namespace modesign {

namespace {

constexpr double kFeasibilityTol = 1e-6;

// Dispersion data of one criterion at w.
struct CriterionData {
  bool is_e = false;
  Eigen::VectorXd d;          // non-E, or E with r* = 1
  Eigen::MatrixXd shifted;    // E with r* > 1: P_ij - lambda_min, N x r*
  int r_star = 0;
};

CriterionData criterion_data(const DesignGrid& grid, const CriterionSpec& spec,
                             const Eigen::VectorXd& w, std::size_t index) {
  CriterionData cd;
  if (spec.kind != CriterionKind::E) {
    cd.d = dispersion(spec, grid, w, index);
    return cd;
  }
  cd.is_e = true;
  const EigenInfo eig = lambda_min_eig(information_matrix(grid, spec.model, w));
  cd.r_star = eig.r_star;
  const Eigen::MatrixXd p = eigen_projections(grid, spec.model, eig);
  if (eig.r_star == 1) {
    cd.d = p.col(0).array() - eig.lambda_min;
  } else {
    cd.shifted = p.array() - eig.lambda_min;
  }
  return cd;
}

// One criterion in the stationarity rows: coefficient 1 (primary) or a
// multiplier eta_k, optionally with complementarity and Condition-1 data.
struct Term {
  std::size_t k = 0;
  bool variable = false;
  std::optional<double> slack;  // Phi_k - h_k, adds +-slack * eta_k <= delta
  double eq_coef = 0.0;         // maximin: coefficient in b^T eta = 1
};

struct Layout {
  std::vector<Eigen::Index> eta_col;  // per term, -1 if fixed
  std::vector<Eigen::Index> e_col;    // per term, first a/s column, -1 if none
  Eigen::Index n = 0;
  Eigen::Index sigma = -1;
};

Certificate assemble(const DesignGrid& grid, const std::vector<CriterionSpec>& specs,
                     const Eigen::VectorXd& w, const std::vector<Term>& terms, bool maximin,
                     double delta) {
  if (!(delta > 0.0)) throw ContractViolation("delta must be positive");
  const auto N = static_cast<Eigen::Index>(grid.size());
  std::vector<CriterionData> data;
  for (const auto& t : terms) data.push_back(criterion_data(grid, specs[t.k], w, t.k));

  auto build = [&](bool relaxed, Layout& lay) {
    lay = Layout{};
    for (std::size_t j = 0; j < terms.size(); ++j) {
      lay.eta_col.push_back(terms[j].variable ? lay.n++ : -1);
    }
    for (std::size_t j = 0; j < terms.size(); ++j) {
      if (data[j].is_e && data[j].r_star > 1) {
        lay.e_col.push_back(lay.n);
        lay.n += data[j].r_star;
      } else {
        lay.e_col.push_back(-1);
      }
    }
    if (relaxed) lay.sigma = lay.n++;

    LinearProgram lp;
    lp.objective = Eigen::VectorXd::Zero(lay.n);
    if (relaxed) {
      lp.objective(lay.sigma) = 1.0;
    } else {
      for (std::size_t j = 0; j < terms.size(); ++j) {
        if (lay.eta_col[j] >= 0) lp.objective(lay.eta_col[j]) = 1.0;
        if (lay.e_col[j] >= 0 && !terms[j].variable) {
          lp.objective.segment(lay.e_col[j], data[j].r_star).setOnes();
        }
      }
    }

    Eigen::Index n_comp = 0;
    for (const auto& t : terms) n_comp += (t.variable && t.slack) ? 2 : 0;
    lp.A_ub = Eigen::MatrixXd::Zero(N + n_comp, lay.n);
    lp.b_ub = Eigen::VectorXd::Constant(N + n_comp, delta);
    for (std::size_t j = 0; j < terms.size(); ++j) {
      const auto& cd = data[j];
      if (lay.e_col[j] >= 0) {
        lp.A_ub.block(0, lay.e_col[j], N, cd.r_star) = cd.shifted;
      } else if (lay.eta_col[j] >= 0) {
        lp.A_ub.col(lay.eta_col[j]).head(N) = cd.d;
      } else {
        lp.b_ub.head(N) -= cd.d;
      }
    }
    Eigen::Index row = N;
    for (std::size_t j = 0; j < terms.size(); ++j) {
      if (!terms[j].variable || !terms[j].slack) continue;
      lp.A_ub(row++, lay.eta_col[j]) = *terms[j].slack;
      lp.A_ub(row++, lay.eta_col[j]) = -*terms[j].slack;
    }
    if (relaxed) lp.A_ub.col(lay.sigma).setConstant(-1.0);

    std::vector<Eigen::VectorXd> eq_rows;
    std::vector<double> eq_rhs;
    if (maximin) {
      Eigen::VectorXd r = Eigen::VectorXd::Zero(lay.n);
      for (std::size_t j = 0; j < terms.size(); ++j) r(lay.eta_col[j]) = terms[j].eq_coef;
      eq_rows.push_back(r);
      eq_rhs.push_back(1.0);
    }
    for (std::size_t j = 0; j < terms.size(); ++j) {
      if (lay.e_col[j] < 0) continue;
      Eigen::VectorXd r = Eigen::VectorXd::Zero(lay.n);
      r.segment(lay.e_col[j], data[j].r_star).setOnes();
      if (terms[j].variable) {
        r(lay.eta_col[j]) = -1.0;  // sum_j s_j = eta_k
        eq_rhs.push_back(0.0);
      } else {
        eq_rhs.push_back(1.0);  // sum_j a_j = 1
      }
      eq_rows.push_back(r);
    }
    lp.A_eq.resize(static_cast<Eigen::Index>(eq_rows.size()), lay.n);
    lp.b_eq.resize(static_cast<Eigen::Index>(eq_rows.size()));
    for (std::size_t r = 0; r < eq_rows.size(); ++r) {
      lp.A_eq.row(static_cast<Eigen::Index>(r)) = eq_rows[r].transpose();
      lp.b_eq(static_cast<Eigen::Index>(r)) = eq_rhs[r];
    }
    return lp;
  };

  Certificate cert;
  cert.delta = delta;
  cert.r_star.assign(specs.size(), 0);
  for (std::size_t j = 0; j < terms.size(); ++j) cert.r_star[terms[j].k] = data[j].r_star;

  Layout lay;
  const LinearProgram lp = build(false, lay);
  LpResult res = lp_solve(lp);
  if (res.status == LpStatus::Optimal) {
    cert.verdict = Verdict::Certified;
    cert.lp_objective = res.objective_value;
  } else {
    cert.verdict = Verdict::NotCertified;
    cert.notes.push_back("verification LP is " + to_string(res.status));
    res = lp_solve(build(true, lay));
    if (res.status != LpStatus::Optimal) {
      throw std::runtime_error("relaxed verification LP failed: " + to_string(res.status));
    }
    cert.excess = res.x(lay.sigma);
  }
  const Eigen::VectorXd& x = res.x;

  // Coefficients and curves at the LP solution.
  cert.a_weights.assign(specs.size(), Eigen::VectorXd());
  cert.curves.assign(specs.size(), Eigen::VectorXd());
  cert.combined = Eigen::VectorXd::Zero(N);
  std::vector<double> eta_values;
  for (std::size_t j = 0; j < terms.size(); ++j) {
    const auto& cd = data[j];
    const double coef = lay.eta_col[j] >= 0 ? x(lay.eta_col[j]) : 1.0;
    if (lay.eta_col[j] >= 0) eta_values.push_back(coef);
    Eigen::VectorXd curve;
    if (lay.e_col[j] >= 0) {
      Eigen::VectorXd a = x.segment(lay.e_col[j], cd.r_star);
      if (terms[j].variable) {
        a = coef > 0.0 ? Eigen::VectorXd(a / coef)
                       : Eigen::VectorXd::Constant(cd.r_star, 1.0 / cd.r_star);
      }
      const double s = a.sum();
      if (s > 0.0) a /= s;
      cert.a_weights[terms[j].k] = a;
      curve = cd.shifted * a;
    } else {
      curve = cd.d;
    }
    cert.combined += coef * curve;
    cert.curves[terms[j].k] = std::move(curve);
  }
  cert.eta = Eigen::Map<const Eigen::VectorXd>(eta_values.data(),
                                                static_cast<Eigen::Index>(eta_values.size()));
  if (!maximin && eta_values.empty()) cert.eta = Eigen::VectorXd::Ones(1);
  cert.max_stationarity_residual = cert.combined.maxCoeff();
  for (std::size_t j = 0; j < terms.size(); ++j) {
    if (lay.eta_col[j] < 0) continue;
    cert.complementarity_residuals.push_back(
        terms[j].slack ? std::abs(x(lay.eta_col[j]) * *terms[j].slack) : 0.0);
  }
  return cert;
}

Certificate infeasible_certificate(const DesignGrid& grid, const std::vector<CriterionSpec>& specs,
                                   const Eigen::VectorXd& w, std::vector<Term> terms,
                                   bool maximin, double delta, const std::string& why) {
  // Curves are still reported; the multipliers come from the relaxed LP.
  for (auto& t : terms) t.slack.reset();
  Certificate c = assemble(grid, specs, w, terms, maximin, delta);
  c.verdict = Verdict::NotCertified;
  c.design_feasible = false;
  c.notes.insert(c.notes.begin(), why);
  return c;
}

}  // namespace

std::string to_string(Verdict verdict) {
  return verdict == Verdict::Certified ? "Certified" : "NotCertified";
}

Certificate verify_single(const CriterionSpec& spec, const DesignGrid& grid, const Design& w,
                          double delta, std::size_t criterion_index) {
  if (w.size() != grid.size()) throw ContractViolation("design does not match the grid");
  std::vector<CriterionSpec> specs(criterion_index + 1);
  specs[criterion_index] = spec;
  Certificate c = assemble(grid, specs, w.weights(), {Term{criterion_index, false, {}, 0.0}},
                           false, delta);
  c.eta = Eigen::VectorXd::Ones(1);
  return c;
}

Certificate certify_constrained(const MultiObjectiveProblem& problem, const Design& w,
                                double delta) {
  problem.validate();
  if (problem.kind != ProblemKind::Constrained) {
    throw ContractViolation("certify_constrained needs a constrained problem");
  }
  if (w.size() != problem.grid.size()) throw ContractViolation("design does not match the grid");
  const std::size_t K = problem.specs.size();
  std::vector<Term> terms{Term{0, false, {}, 0.0}};
  std::string violation;
  for (std::size_t k = 1; k < K; ++k) {
    const double phi = criterion_value(problem.grid, problem.specs[k], w.weights(), k);
    const double h = problem.bound_value(k);
    terms.push_back(Term{k, true, phi - h, 0.0});
    const double eff = efficiency_from_value(problem.specs[k].kind, problem.q_of(k), phi,
                                             problem.min_phi_of(k));
    if (eff < problem.bounds[k - 1] - kFeasibilityTol && violation.empty()) {
      violation = "design violates the efficiency bound of criterion " + std::to_string(k) +
                  " (Eff = " + std::to_string(eff) + " < " +
                  std::to_string(problem.bounds[k - 1]) + ")";
    }
  }
  if (!violation.empty()) {
    return infeasible_certificate(problem.grid, problem.specs, w.weights(), terms, false, delta,
                                  violation);
  }
  Certificate c = assemble(problem.grid, problem.specs, w.weights(), terms, false, delta);
  // Slater point heuristic: the uniform design should satisfy every bound.
  const Eigen::VectorXd u = Design::uniform(problem.grid.size()).weights();
  try {
    for (std::size_t k = 1; k < K; ++k) {
      if (!(criterion_value(problem.grid, problem.specs[k], u, k) < problem.bound_value(k))) {
        c.notes.push_back("uniform design is not strictly feasible; strict feasibility assumed");
        break;
      }
    }
  } catch (const SingularInformationMatrix&) {
    c.notes.push_back("uniform design is singular; strict feasibility assumed");
  }
  return c;
}

Certificate certify_maximin(const MultiObjectiveProblem& problem, const Design& w, double t,
                            double delta) {
  problem.validate();
  if (problem.kind != ProblemKind::Maximin) {
    throw ContractViolation("certify_maximin needs a maximin problem");
  }
  if (w.size() != problem.grid.size()) throw ContractViolation("design does not match the grid");
  if (!(t > 0.0)) throw ContractViolation("maximin certificate needs t > 0");
  std::vector<Term> terms;
  std::string violation;
  for (std::size_t k = 0; k < problem.specs.size(); ++k) {
    const auto& spec = problem.specs[k];
    const int q = problem.q_of(k);
    const double mp = problem.min_phi_of(k);
    const double phi = criterion_value(problem.grid, spec, w.weights(), k);
    const double h = detail::h_at_reciprocal(spec.kind, t, mp, q);
    terms.push_back(Term{k, true, phi - h, h_reciprocal_derivative(spec.kind, t, mp, q)});
    const double eff = efficiency_from_value(spec.kind, q, phi, mp);
    if (eff < 1.0 / t - kFeasibilityTol && violation.empty()) {
      violation = "design has Eff_" + std::to_string(k + 1) + " = " + std::to_string(eff) +
                  " below 1/t = " + std::to_string(1.0 / t);
    }
  }
  if (!violation.empty()) {
    return infeasible_certificate(problem.grid, problem.specs, w.weights(), terms, true, delta,
                                  violation);
  }
  return assemble(problem.grid, problem.specs, w.weights(), terms, true, delta);
}

Certificate certify(const MultiObjectiveProblem& problem, const Design& w,
                    std::optional<double> t, double delta) {
  switch (problem.kind) {
    case ProblemKind::Single:
      return verify_single(problem.specs.at(problem.single_index), problem.grid, w, delta,
                           problem.single_index);
    case ProblemKind::Constrained:
      return certify_constrained(problem, w, delta);
    case ProblemKind::Maximin: {
      if (!t) {
        const auto eff = efficiencies(problem, w.weights());
        t = 1.0 / *std::min_element(eff.begin(), eff.end());
      }
      return certify_maximin(problem, w, *t, delta);
    }
  }
  throw ContractViolation("unknown problem kind");
}

Eigen::MatrixXd dispersion_report(const MultiObjectiveProblem& problem, const Design& w,
                                  const Certificate& certificate) {
  const auto N = static_cast<Eigen::Index>(problem.grid.size());
  const auto K = static_cast<Eigen::Index>(problem.specs.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(N, K + 1);
  for (Eigen::Index k = 0; k < K; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    if (kk < certificate.curves.size() && certificate.curves[kk].size() == N) {
      out.col(k) = certificate.curves[kk];
      continue;
    }
    // Criterion not part of the certificate (single problems): recompute.
    const auto& spec = problem.specs[static_cast<std::size_t>(k)];
    if (spec.kind != CriterionKind::E) {
      out.col(k) = dispersion(spec, problem.grid, w.weights(), static_cast<std::size_t>(k));
    } else {
      const EigenInfo eig =
          lambda_min_eig(information_matrix(problem.grid, spec.model, w.weights()));
      out.col(k) = e_dispersion(problem.grid, spec.model, eig,
                                Eigen::VectorXd::Constant(eig.r_star, 1.0 / eig.r_star));
    }
  }
  out.col(K) = certificate.combined;
  return out;
}

}  // namespace modesign
