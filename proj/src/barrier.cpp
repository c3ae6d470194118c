#include "barrier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "modesign/errors.hpp"

namespace modesign::detail {

namespace {

// Newton decrement^2 / 2 that ends a centering stage; intermediate stages
// only need to stay near the central path.
constexpr double kCenteringTolerance = 1e-9;
constexpr double kLooseCenteringTolerance = 1e-6;
constexpr double kArmijo = 1e-4;
constexpr double kBacktrack = 0.5;
constexpr double kBoundaryFraction = 0.99;
// A step may shrink a constraint slack by at most this factor.
constexpr double kSlackFraction = 0.7;
constexpr double kNoiseFactor = 1e-12;

Eigen::MatrixXd weight_matrix(const CriterionSpec& spec, Eigen::Index q) {
  switch (spec.kind) {
    case CriterionKind::A:
      return Eigen::MatrixXd::Identity(q, q);
    case CriterionKind::C:
      return spec.c * spec.c.transpose();
    default:
      return spec.L * spec.L.transpose();
  }
}

// pi_k * (1 - exp(-x)) / (mu x) with x = (lambda_j - lambda_k) / mu >= 0, the
// divided difference of the softmin gradient.
double softmin_divided_difference(double pi_k, double gap, double mu) {
  const double x = gap / mu;
  if (x < 1e-8) return pi_k / mu;
  return pi_k * (-std::expm1(-x)) / gap;
}

}  // namespace

double h_at_reciprocal(CriterionKind kind, double t, double min_phi, int q) {
  switch (kind) {
    case CriterionKind::D:
      return min_phi + q * std::log(t);
    case CriterionKind::E:
      return min_phi / t;
    default:
      return min_phi * t;
  }
}

double h_reciprocal_second_derivative(CriterionKind kind, double t, double min_phi, int q) {
  switch (kind) {
    case CriterionKind::D:
      return -q / (t * t);
    case CriterionKind::E:
      return 2.0 * min_phi / (t * t * t);
    default:
      return 0.0;
  }
}

std::optional<TermEval> evaluate_term(const DesignGrid& grid, const CriterionSpec& spec,
                                      const Eigen::VectorXd& w, double mu_e, Want want) {
  const Eigen::MatrixXd& z = grid.z(spec.model);
  Eigen::MatrixXd m = z.transpose() * w.asDiagonal() * z;
  m = 0.5 * (m + m.transpose());
  const auto q = m.rows();
  TermEval out;

  if (spec.kind == CriterionKind::E) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    const Eigen::VectorXd& lam = es.eigenvalues();
    const double lmin = lam(0);
    const Eigen::VectorXd ex = (-(lam.array() - lmin) / mu_e).exp().matrix();
    const double total = ex.sum();
    const Eigen::VectorXd pi = ex / total;
    out.value = -lmin + mu_e * std::log(total);
    if (want == Want::Value) return out;
    const Eigen::MatrixXd y = z * es.eigenvectors();
    const Eigen::MatrixXd sq = y.array().square().matrix();
    out.grad = -sq * pi;
    if (want == Want::Gradient) return out;
    const Eigen::MatrixXd f2 =
        (Eigen::MatrixXd(pi.asDiagonal()) - pi * pi.transpose()) / mu_e;
    out.hess = sq * f2 * sq.transpose();
    for (Eigen::Index j = 0; j < q; ++j) {
      for (Eigen::Index k = j + 1; k < q; ++k) {
        // lam ascending: lam(k) >= lam(j)
        const double dd = softmin_divided_difference(pi(j), lam(k) - lam(j), mu_e);
        if (dd <= 0.0) continue;
        const Eigen::VectorXd u = y.col(j).cwiseProduct(y.col(k));
        out.hess.noalias() += (2.0 * dd) * u * u.transpose();
      }
    }
    return out;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ev(m, Eigen::EigenvaluesOnly);
  const double lmin = ev.eigenvalues()(0);
  const double lmax = ev.eigenvalues()(q - 1);
  if (!(lmax > 0.0) || !(lmin > kPdThreshold * lmax)) return std::nullopt;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) return std::nullopt;

  if (spec.kind == CriterionKind::D) {
    const Eigen::MatrixXd lower = llt.matrixL();
    out.value = -2.0 * lower.diagonal().array().log().sum();
    if (want == Want::Value) return out;
    // columns b_i = L^{-1} z_i, so b_i^T b_j = z_i^T M^{-1} z_j
    const Eigen::MatrixXd b = lower.triangularView<Eigen::Lower>().solve(z.transpose());
    out.grad = -b.colwise().squaredNorm().transpose();
    if (want == Want::Gradient) return out;
    const Eigen::MatrixXd g = b.transpose() * b;
    out.hess = g.array().square().matrix();
    return out;
  }

  const Eigen::MatrixXd minv = llt.solve(Eigen::MatrixXd::Identity(q, q));
  const Eigen::MatrixXd p = weight_matrix(spec, q);
  out.value = (minv * p).trace();
  if (want == Want::Value) return out;
  const Eigen::MatrixXd c = z * minv;  // rows M^{-1} z_i
  out.grad = -((c * p).array() * c.array()).rowwise().sum().matrix();
  if (want == Want::Gradient) return out;
  const Eigen::MatrixXd g = c * z.transpose();
  const Eigen::MatrixXd gp = c * p * c.transpose();
  out.hess = 2.0 * g.cwiseProduct(gp);
  return out;
}

namespace {

struct Terms {
  std::vector<std::optional<TermEval>> by_criterion;
};

class Engine {
 public:
  Engine(const DesignGrid& grid, const std::vector<CriterionSpec>& specs,
         const BarrierSetup& setup)
      : grid_(grid), specs_(specs), setup_(setup), n_w_(static_cast<Eigen::Index>(grid.size())) {
    used_.assign(specs.size(), false);
    if (setup.objective) used_.at(*setup.objective) = true;
    for (const auto& c : setup.constraints) used_.at(c.criterion) = true;
    if (!setup.objective && !setup.has_aux) {
      throw ContractViolation("barrier objective must be a criterion or the auxiliary variable");
    }
    n_ = n_w_ + (setup.has_aux ? 1 : 0);
    barrier_count_ = static_cast<double>(n_w_ + static_cast<Eigen::Index>(setup.constraints.size()));
  }

  BarrierOutcome run();

 private:
  struct Merit {
    bool ok = false;
    double f0 = 0.0;
    double phi = 0.0;  // barrier part
    std::vector<double> slack;
  };

  double mu_e(double mu) const { return std::max(setup_.e_scale * mu, setup_.e_floor); }

  int q_of(std::size_t k) const {
    return grid_.model(specs_[k].model).num_params();
  }

  Terms evaluate(const Eigen::VectorXd& w, double mu, Want want) const {
    Terms t;
    t.by_criterion.resize(specs_.size());
    for (std::size_t k = 0; k < specs_.size(); ++k) {
      if (!used_[k]) continue;
      t.by_criterion[k] = evaluate_term(grid_, specs_[k], w, mu_e(mu), want);
    }
    return t;
  }

  // g value and d g / d tau, d2 g / d tau2
  struct ConstraintValue {
    double g, dtau, d2tau;
  };

  ConstraintValue constraint_value(const BarrierConstraint& c, double phi, double tau) const {
    switch (c.form) {
      case BarrierConstraint::Form::Fixed:
        return {phi - c.bound, 0.0, 0.0};
      case BarrierConstraint::Form::FixedMinusAux:
        return {phi - c.bound - tau, -1.0, 0.0};
      case BarrierConstraint::Form::Reciprocal: {
        const auto kind = specs_[c.criterion].kind;
        const int q = q_of(c.criterion);
        const double h = h_at_reciprocal(kind, tau, c.min_phi, q);
        return {phi - h, -h_reciprocal_derivative(kind, tau, c.min_phi, q),
                -h_reciprocal_second_derivative(kind, tau, c.min_phi, q)};
      }
    }
    return {0.0, 0.0, 0.0};
  }

  Merit merit(const Eigen::VectorXd& w, double tau, double mu) const {
    Merit r;
    if (w.minCoeff() <= 0.0) return r;
    if (setup_.has_aux && !(tau > setup_.aux_lower)) return r;
    const Terms t = evaluate(w, mu, Want::Value);
    for (std::size_t k = 0; k < specs_.size(); ++k) {
      if (used_[k] && !t.by_criterion[k]) return r;
    }
    r.f0 = setup_.objective ? t.by_criterion[*setup_.objective]->value : tau;
    r.phi = -w.array().log().sum();
    for (const auto& c : setup_.constraints) {
      const auto cv = constraint_value(c, t.by_criterion[c.criterion]->value, tau);
      if (!(cv.g < 0.0)) return r;
      r.phi -= std::log(-cv.g);
      r.slack.push_back(-cv.g);
    }
    r.ok = std::isfinite(r.f0) && std::isfinite(r.phi);
    return r;
  }

  // Exact minimization of the merit over tau for fixed w (1-D damped
  // Newton). Keeps the auxiliary variable on its conditional optimum so
  // that it does not jam against a constraint after a mu update.
  double recenter_aux(const Eigen::VectorXd& w, double tau, double mu) const {
    if (!setup_.has_aux) return tau;
    const Terms t = evaluate(w, mu, Want::Value);
    std::vector<double> phi;
    for (const auto& c : setup_.constraints) phi.push_back(t.by_criterion[c.criterion]->value);
    const double lin = setup_.objective ? 0.0 : 1.0 / mu;
    auto psi = [&](double x, double& d1, double& d2) {
      if (!(x > setup_.aux_lower)) return std::numeric_limits<double>::infinity();
      double v = lin * x;
      d1 = lin;
      d2 = 0.0;
      for (std::size_t j = 0; j < phi.size(); ++j) {
        const auto cv = constraint_value(setup_.constraints[j], phi[j], x);
        if (!(cv.g < 0.0)) return std::numeric_limits<double>::infinity();
        v -= std::log(-cv.g);
        d1 += cv.dtau / -cv.g;
        d2 += cv.d2tau / -cv.g + (cv.dtau * cv.dtau) / (cv.g * cv.g);
      }
      return v;
    };
    double d1, d2;
    double v = psi(tau, d1, d2);
    for (int it = 0; it < 100 && std::isfinite(v); ++it) {
      if (!(d2 > 0.0)) break;
      const double step = -d1 / d2;
      if (0.5 * d1 * d1 / d2 <= 1e-14) break;
      double alpha = 1.0;
      double e1 = 0.0, e2 = 0.0, trial = 0.0;
      bool moved = false;
      while (alpha > 1e-16) {
        trial = psi(tau + alpha * step, e1, e2);
        if (trial <= v + kArmijo * alpha * d1 * step) {
          moved = true;
          break;
        }
        alpha *= kBacktrack;
      }
      if (!moved) break;
      tau += alpha * step;
      v = trial;
      d1 = e1;
      d2 = e2;
    }
    return tau;
  }

  const DesignGrid& grid_;
  const std::vector<CriterionSpec>& specs_;
  const BarrierSetup& setup_;
  Eigen::Index n_w_;
  Eigen::Index n_ = 0;
  double barrier_count_ = 0.0;
  std::vector<bool> used_;
};

BarrierOutcome Engine::run() {
  BarrierOutcome out;
  Eigen::VectorXd w = setup_.w0;
  double tau = setup_.tau0;
  double mu = setup_.mu_start;
  Eigen::VectorXd a = Eigen::VectorXd::Zero(n_);
  a.head(n_w_).setOnes();

  if (w.size() != n_w_) throw ContractViolation("barrier start has the wrong dimension");
  if (!merit(w, tau, mu).ok) {
    throw ContractViolation("barrier start point is not strictly feasible");
  }

  double last_decrement = std::numeric_limits<double>::infinity();
  bool done = false;
  while (!done) {
    // Centering by damped Newton.
    for (;;) {
      if (out.iterations >= setup_.max_newton) {
        out.hit_cap = true;
        done = true;
        break;
      }
      const Terms t = evaluate(w, mu, Want::Hessian);
      Eigen::VectorXd grad = Eigen::VectorXd::Zero(n_);
      Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(n_, n_);
      Eigen::VectorXd grad_f0 = Eigen::VectorXd::Zero(n_);  // f0 part of grad
      if (setup_.objective) {
        const TermEval& f = *t.by_criterion[*setup_.objective];
        grad_f0.head(n_w_) = f.grad;
        hess.topLeftCorner(n_w_, n_w_) = f.hess / mu;
      } else {
        grad_f0(n_ - 1) = 1.0;
      }
      grad = grad_f0 / mu;
      grad.head(n_w_).array() -= w.array().inverse();
      hess.diagonal().head(n_w_).array() += w.array().inverse().square();
      for (const auto& c : setup_.constraints) {
        const TermEval& term = *t.by_criterion[c.criterion];
        const auto cv = constraint_value(c, term.value, tau);
        const double inv = -1.0 / cv.g;  // > 0
        Eigen::VectorXd dg(n_);
        dg.head(n_w_) = term.grad;
        if (setup_.has_aux) dg(n_ - 1) = cv.dtau;
        grad += inv * dg;
        hess.noalias() += (inv * inv) * dg * dg.transpose();
        hess.topLeftCorner(n_w_, n_w_) += inv * term.hess;
        if (setup_.has_aux) hess(n_ - 1, n_ - 1) += inv * cv.d2tau;
      }

      Eigen::LLT<Eigen::MatrixXd> llt(hess);
      double ridge = 1e-14 * std::max(1.0, hess.diagonal().cwiseAbs().maxCoeff());
      while (llt.info() != Eigen::Success) {
        hess.diagonal().array() += ridge;
        ridge *= 10.0;
        llt.compute(hess);
      }
      const Eigen::VectorXd u = llt.solve(grad);
      const Eigen::VectorXd v = llt.solve(a);
      const double nu = -a.dot(u) / a.dot(v);
      const Eigen::VectorXd step = -(u + nu * v);
      const double lambda2 = std::max(0.0, -grad.dot(step));
      const Merit here = merit(w, tau, mu);
      const double noise =
          kNoiseFactor * (std::abs(here.f0) / mu + std::abs(here.phi) + 1.0);
      last_decrement = 0.5 * lambda2 * mu;
      const double center_tol = mu <= setup_.mu_min * (1.0 + 1e-12) ? kCenteringTolerance
                                                                      : kLooseCenteringTolerance;
      if (0.5 * lambda2 <= center_tol || 0.5 * lambda2 <= noise) break;

      // Largest step keeping w and tau inside their open domains.
      double alpha = 1.0;
      for (Eigen::Index i = 0; i < n_w_; ++i) {
        if (step(i) < 0.0) alpha = std::min(alpha, -kBoundaryFraction * w(i) / step(i));
      }
      if (setup_.has_aux && std::isfinite(setup_.aux_lower) && step(n_ - 1) < 0.0) {
        alpha = std::min(alpha, -kBoundaryFraction * (tau - setup_.aux_lower) / step(n_ - 1));
      }
      const double slope = grad.dot(step);  // = -lambda2
      bool accepted = false;
      while (alpha > 1e-16) {
        const Eigen::VectorXd w_new = w + alpha * step.head(n_w_);
        const double tau_new = setup_.has_aux ? tau + alpha * step(n_ - 1) : tau;
        const Merit trial = merit(w_new, tau_new, mu);
        bool kept = trial.ok;
        for (std::size_t j = 0; kept && j < trial.slack.size(); ++j) {
          kept = trial.slack[j] >= kSlackFraction * here.slack[j];
        }
        if (kept) {
          const double change = (trial.f0 - here.f0) / mu + (trial.phi - here.phi);
          if (change <= kArmijo * alpha * slope || change <= noise) {
            w = w_new;
            tau = tau_new;
            accepted = true;
            break;
          }
        }
        alpha *= kBacktrack;
      }
      ++out.iterations;
      if (!accepted) break;  // no representable progress along the Newton direction
      tau = recenter_aux(w, tau, mu);

      if (setup_.monitor) {
        const BarrierState s{w, tau, mu, barrier_count_ * mu, false};
        if (setup_.monitor(s) == StageDecision::Stop) {
          out.stopped_by_monitor = true;
          done = true;
          break;
        }
      }
    }
    if (done) break;

    const Merit centered = merit(w, tau, mu);
    out.stage_objectives.push_back(centered.f0);
    const double gap = barrier_count_ * mu;
    if (setup_.monitor) {
      const BarrierState s{w, tau, mu, gap, true};
      if (setup_.monitor(s) == StageDecision::Stop) {
        out.stopped_by_monitor = true;
        break;
      }
    }
    if (mu <= setup_.mu_min * (1.0 + 1e-12) &&
        gap / std::max(1.0, std::abs(centered.f0)) <= 0.5 * setup_.tol) {
      break;
    }
    mu *= setup_.mu_factor;
    tau = recenter_aux(w, tau, mu);
  }

  const Merit fin = merit(w, tau, mu);
  out.w = w / w.sum();
  out.tau = tau;
  out.objective = fin.f0;
  out.mu = mu;
  // Suboptimality bound in f0 units: duality gap of the central point plus
  // the centering error of the last Newton decrement.
  out.kkt_residual = (barrier_count_ * mu + last_decrement) / std::max(1.0, std::abs(fin.f0));
  return out;
}

}  // namespace

BarrierOutcome run_barrier(const DesignGrid& grid, const std::vector<CriterionSpec>& specs,
                           const BarrierSetup& setup) {
  return Engine(grid, specs, setup).run();
}

}  // namespace modesign::detail
