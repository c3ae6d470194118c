#include "modesign/criteria.hpp"

#include <algorithm>
#include <cmath>

#include "modesign/errors.hpp"

namespace modesign {

namespace {

// Cholesky factor after the lambda_min > 1e-12 lambda_max guard.
Eigen::LLT<Eigen::MatrixXd> checked_cholesky(const Eigen::MatrixXd& m, std::size_t index) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  const double lmax = es.eigenvalues()(es.eigenvalues().size() - 1);
  if (!(lmin > kPdThreshold * lmax) || !(lmax > 0.0)) throw SingularInformationMatrix(lmin, index);
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw SingularInformationMatrix(lmin, index);
  return llt;
}

// P such that phi = trace(M^{-1} P) for A, c and L.
Eigen::MatrixXd weight_matrix(const CriterionSpec& spec, int q) {
  switch (spec.kind) {
    case CriterionKind::A:
      return Eigen::MatrixXd::Identity(q, q);
    case CriterionKind::C:
      return spec.c * spec.c.transpose();
    case CriterionKind::L:
      return spec.L * spec.L.transpose();
    default:
      throw ContractViolation("weight_matrix only applies to A, c and L criteria");
  }
}

void require_not_e(const CriterionSpec& spec, const char* what) {
  if (spec.kind == CriterionKind::E) {
    throw ContractViolation(std::string(what) +
                            " is undefined for E-optimality; use the eigenvalue machinery");
  }
}

}  // namespace

std::string to_string(CriterionKind kind) {
  switch (kind) {
    case CriterionKind::D:
      return "D";
    case CriterionKind::A:
      return "A";
    case CriterionKind::C:
      return "c";
    case CriterionKind::L:
      return "L";
    case CriterionKind::E:
      return "E";
  }
  return "?";
}

CriterionSpec CriterionSpec::d_optimal(std::size_t model) {
  return {CriterionKind::D, model, {}, {}, "D"};
}

CriterionSpec CriterionSpec::a_optimal(std::size_t model) {
  return {CriterionKind::A, model, {}, {}, "A"};
}

CriterionSpec CriterionSpec::c_optimal(std::size_t model, Eigen::VectorXd c) {
  return {CriterionKind::C, model, std::move(c), {}, "c"};
}

CriterionSpec CriterionSpec::l_optimal(std::size_t model, Eigen::MatrixXd L) {
  return {CriterionKind::L, model, {}, std::move(L), "L"};
}

CriterionSpec CriterionSpec::e_optimal(std::size_t model) {
  return {CriterionKind::E, model, {}, {}, "E"};
}

void CriterionSpec::validate(int q) const {
  if (kind == CriterionKind::C) {
    if (c.size() != q) {
      throw ContractViolation("c vector has length " + std::to_string(c.size()) +
                              ", model has " + std::to_string(q) + " parameters");
    }
    if (c.squaredNorm() == 0.0) throw ContractViolation("c vector must be nonzero");
  }
  if (kind == CriterionKind::L) {
    if (L.rows() != q || L.cols() < 1) {
      throw ContractViolation("L matrix must have " + std::to_string(q) + " rows");
    }
    if (L.squaredNorm() == 0.0) throw ContractViolation("L matrix must be nonzero");
  }
}

EigenInfo lambda_min_eig(const Eigen::MatrixXd& m, double eps_eig) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  EigenInfo info;
  info.eigenvalues = es.eigenvalues();
  info.lambda_min = info.eigenvalues(0);
  const double cut = eps_eig * std::max(1.0, std::abs(info.lambda_min));
  int r = 1;
  while (r < info.eigenvalues.size() && info.eigenvalues(r) - info.lambda_min <= cut) ++r;
  info.r_star = r;
  info.eigenvectors = es.eigenvectors().leftCols(r);
  return info;
}

double phi_value(const CriterionSpec& spec, const Eigen::MatrixXd& m,
                 std::size_t criterion_index) {
  if (spec.kind == CriterionKind::E) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return -es.eigenvalues()(0);
  }
  const auto llt = checked_cholesky(m, criterion_index);
  const Eigen::MatrixXd lower = llt.matrixL();
  const auto tri = lower.triangularView<Eigen::Lower>();
  switch (spec.kind) {
    case CriterionKind::D:
      return -2.0 * lower.diagonal().array().log().sum();
    case CriterionKind::A:
      return tri.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols())).squaredNorm();
    case CriterionKind::C:
      return tri.solve(spec.c).squaredNorm();
    case CriterionKind::L:
      return tri.solve(spec.L).squaredNorm();
    default:
      break;
  }
  return 0.0;
}

Eigen::MatrixXd phi_gradient(const CriterionSpec& spec, const Eigen::MatrixXd& m,
                             std::size_t criterion_index) {
  require_not_e(spec, "phi_gradient");
  const auto llt = checked_cholesky(m, criterion_index);
  const auto q = m.rows();
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(q, q));
  Eigen::MatrixXd g;
  if (spec.kind == CriterionKind::D) {
    g = -inv;
  } else {
    g = -inv * weight_matrix(spec, static_cast<int>(q)) * inv;
  }
  return 0.5 * (g + g.transpose());
}

double criterion_value(const DesignGrid& grid, const CriterionSpec& spec,
                       const Eigen::Ref<const Eigen::VectorXd>& w,
                       std::size_t criterion_index) {
  return phi_value(spec, information_matrix(grid, spec.model, w), criterion_index);
}

Eigen::VectorXd dispersion(const CriterionSpec& spec, const DesignGrid& grid,
                           const Eigen::Ref<const Eigen::VectorXd>& w,
                           std::size_t criterion_index) {
  require_not_e(spec, "dispersion");
  const Eigen::MatrixXd m = information_matrix(grid, spec.model, w);
  const Eigen::MatrixXd g = phi_gradient(spec, m, criterion_index);
  const double base = (g.transpose() * m).trace();
  const Eigen::MatrixXd& z = grid.z(spec.model);
  // z_i^T G z_i for every row
  const Eigen::VectorXd quad = ((z * g).array() * z.array()).rowwise().sum();
  return (base - quad.array()).matrix();
}

Eigen::MatrixXd eigen_projections(const DesignGrid& grid, std::size_t model,
                                  const EigenInfo& eig) {
  return (grid.z(model) * eig.eigenvectors).array().square().matrix();
}

Eigen::VectorXd e_dispersion(const DesignGrid& grid, std::size_t model, const EigenInfo& eig,
                             const Eigen::Ref<const Eigen::VectorXd>& a) {
  if (a.size() != eig.r_star) {
    throw ContractViolation("e_dispersion: expected " + std::to_string(eig.r_star) +
                            " eigen-weights, got " + std::to_string(a.size()));
  }
  if (a.size() > 0 && (a.minCoeff() < -1e-8 || std::abs(a.sum() - 1.0) > 1e-8)) {
    throw ContractViolation("e_dispersion: eigen-weights must lie on the simplex");
  }
  return (eigen_projections(grid, model, eig) * a).array() - eig.lambda_min;
}

Eigen::VectorXd e_dispersion(const DesignGrid& grid, std::size_t model,
                             const Eigen::Ref<const Eigen::VectorXd>& w,
                             const Eigen::Ref<const Eigen::VectorXd>& a, double eps_eig) {
  return e_dispersion(grid, model, lambda_min_eig(information_matrix(grid, model, w), eps_eig),
                      a);
}

double efficiency_from_value(CriterionKind kind, int q, double phi, double min_phi) {
  switch (kind) {
    case CriterionKind::D:
      return std::exp((min_phi - phi) / q);
    case CriterionKind::E:
      if (!(min_phi < 0.0)) {
        throw ContractViolation("E-efficiency needs a negative optimal criterion value");
      }
      return phi / min_phi;
    default:
      if (!(min_phi > 0.0)) {
        throw ContractViolation(to_string(kind) +
                                "-efficiency needs a positive optimal criterion value");
      }
      return min_phi / phi;
  }
}

double efficiency(const DesignGrid& grid, const CriterionSpec& spec,
                  const Eigen::Ref<const Eigen::VectorXd>& w, double min_phi) {
  const int q = grid.model(spec.model).num_params();
  return efficiency_from_value(spec.kind, q, criterion_value(grid, spec, w), min_phi);
}

double h_of_m(CriterionKind kind, double m, double min_phi, int q) {
  if (!(m > 0.0) || m > 1.0) throw ContractViolation("efficiency bound must lie in (0, 1]");
  switch (kind) {
    case CriterionKind::D:
      return min_phi - q * std::log(m);
    case CriterionKind::E:
      return m * min_phi;
    default:
      return min_phi / m;
  }
}

double h_reciprocal_derivative(CriterionKind kind, double t, double min_phi, int q) {
  if (!(t > 0.0)) throw ContractViolation("h_reciprocal_derivative needs t > 0");
  switch (kind) {
    case CriterionKind::D:
      return q / t;
    case CriterionKind::E:
      return -min_phi / (t * t);
    default:
      return min_phi;
  }
}

double softmin_eigenvalue(const Eigen::MatrixXd& m, double mu) {
  if (!(mu > 0.0)) throw ContractViolation("softmin_eigenvalue needs mu > 0");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()),
                                                    Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& lam = es.eigenvalues();
  const double lmin = lam(0);
  const double s = (-(lam.array() - lmin) / mu).exp().sum();
  return lmin - mu * std::log(s);
}

}  // namespace modesign
