#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "modesign/grid.hpp"

namespace modesign {

enum class CriterionKind { D, A, C, L, E };

std::string to_string(CriterionKind kind);

/// One optimality criterion bound to one model of the grid.
struct CriterionSpec {
  CriterionKind kind = CriterionKind::D;
  std::size_t model = 0;  // index into DesignGrid models
  Eigen::VectorXd c;      // kind == C
  Eigen::MatrixXd L;      // kind == L, q x q'
  std::string name;

  static CriterionSpec d_optimal(std::size_t model);
  static CriterionSpec a_optimal(std::size_t model);
  static CriterionSpec c_optimal(std::size_t model, Eigen::VectorXd c);
  static CriterionSpec l_optimal(std::size_t model, Eigen::MatrixXd L);
  static CriterionSpec e_optimal(std::size_t model);

  /// Throws ContractViolation when parameters do not fit a model with q
  /// parameters (wrong lengths, zero c or L).
  void validate(int q) const;
};

/// Smallest eigenvalue of a symmetric matrix, its multiplicity and an
/// orthonormal basis of the eigenspace.
struct EigenInfo {
  double lambda_min = 0.0;
  int r_star = 1;
  Eigen::MatrixXd eigenvectors;  // q x r_star
  Eigen::VectorXd eigenvalues;   // all, ascending
};

inline constexpr double kDefaultEigTolerance = 1e-6;
/// D/A/c/L need lambda_min(M) > kPdThreshold * lambda_max(M).
inline constexpr double kPdThreshold = 1e-12;

/// Eigenvalues within eps_eig * max(1, |lambda_min|) of the smallest count
/// towards r_star.
EigenInfo lambda_min_eig(const Eigen::MatrixXd& m, double eps_eig = kDefaultEigTolerance);

/// phi(M). For D/A/c/L throws SingularInformationMatrix (tagged with
/// `criterion_index`) unless M is numerically positive definite.
double phi_value(const CriterionSpec& spec, const Eigen::MatrixXd& m,
                 std::size_t criterion_index = 0);

/// Matrix gradient of phi at M (D/A/c/L only).
Eigen::MatrixXd phi_gradient(const CriterionSpec& spec, const Eigen::MatrixXd& m,
                             std::size_t criterion_index = 0);

/// Phi(w) = phi(I_f(w)) on the grid.
double criterion_value(const DesignGrid& grid, const CriterionSpec& spec,
                       const Eigen::Ref<const Eigen::VectorXd>& w,
                       std::size_t criterion_index = 0);

/// d(u_i, w) = trace(grad_phi(M)^T (M - z_i z_i^T)) for every grid point.
Eigen::VectorXd dispersion(const CriterionSpec& spec, const DesignGrid& grid,
                           const Eigen::Ref<const Eigen::VectorXd>& w,
                           std::size_t criterion_index = 0);

/// (v_j^T z_i)^2 for every grid point i and eigenvector j of `eig`; N x r.
Eigen::MatrixXd eigen_projections(const DesignGrid& grid, std::size_t model,
                                  const EigenInfo& eig);

/// sum_j a_j (v_j^T z_i)^2 - lambda_min for every grid point.
Eigen::VectorXd e_dispersion(const DesignGrid& grid, std::size_t model, const EigenInfo& eig,
                             const Eigen::Ref<const Eigen::VectorXd>& a);
Eigen::VectorXd e_dispersion(const DesignGrid& grid, std::size_t model,
                             const Eigen::Ref<const Eigen::VectorXd>& w,
                             const Eigen::Ref<const Eigen::VectorXd>& a,
                             double eps_eig = kDefaultEigTolerance);

/// Efficiency of a design whose criterion value is `phi` relative to the
/// optimum `min_phi`. D uses exp((min_phi - phi) / q).
double efficiency_from_value(CriterionKind kind, int q, double phi, double min_phi);
double efficiency(const DesignGrid& grid, const CriterionSpec& spec,
                  const Eigen::Ref<const Eigen::VectorXd>& w, double min_phi);

/// Criterion-value bound equivalent to Eff >= m.
double h_of_m(CriterionKind kind, double m, double min_phi, int q);

/// d/dt h(1/t) for t > 0.
double h_reciprocal_derivative(CriterionKind kind, double t, double min_phi, int q);

/// Softmin of the eigenvalues, -mu log sum_j exp(-lambda_j / mu). Never
/// exceeds lambda_min and is within mu log q of it.
double softmin_eigenvalue(const Eigen::MatrixXd& m, double mu);

}  // namespace modesign
