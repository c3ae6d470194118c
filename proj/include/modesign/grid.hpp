#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "modesign/model.hpp"

namespace modesign {

/// Equally spaced points on [lo, hi], endpoints included.
struct IntervalFactor {
  double lo = 0.0;
  double hi = 1.0;
  int points = 2;
};

/// A finite set of levels, used in the order given.
struct SetFactor {
  std::vector<double> levels;
};

using SpaceFactor = std::variant<IntervalFactor, SetFactor>;

/// Product of factors. Points are ordered lexicographically with the first
/// factor outermost.
struct SpaceSpec {
  std::vector<SpaceFactor> factors;
};

using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Discrete design space u_1..u_N plus, for every registered model, the
/// N x q matrix whose row i is z_f(u_i). Rows are computed once, at
/// construction.
class DesignGrid {
 public:
  DesignGrid() = default;
  explicit DesignGrid(PointMatrix points, std::vector<SpaceFactor> factors = {});

  /// Copy of this grid with gradient tables for `models`.
  DesignGrid with_models(std::vector<RegressionModel> models) const;

  std::size_t size() const noexcept { return static_cast<std::size_t>(points_.rows()); }
  int dimension() const noexcept { return static_cast<int>(points_.cols()); }
  const PointMatrix& points() const noexcept { return points_; }
  std::span<const double> point(std::size_t i) const;
  const std::vector<SpaceFactor>& factors() const noexcept { return factors_; }

  std::size_t num_models() const noexcept { return models_.size(); }
  const RegressionModel& model(std::size_t m) const;
  /// N x q gradient table of model m.
  const Eigen::MatrixXd& z(std::size_t m) const;

 private:
  PointMatrix points_;  // N x p
  std::vector<SpaceFactor> factors_;
  std::vector<RegressionModel> models_;
  std::vector<Eigen::MatrixXd> z_;
};

DesignGrid build_grid(const SpaceSpec& spec);

/// Weight vector on the probability simplex.
class Design {
 public:
  static constexpr double kDefaultSupportThreshold = 1e-4;

  Design() = default;
  /// Throws ContractViolation unless w >= 0 and sum(w) = 1 within 1e-10.
  explicit Design(Eigen::VectorXd weights,
                  double support_threshold = kDefaultSupportThreshold);

  static Design uniform(std::size_t n);

  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(weights_.size()); }
  double support_threshold() const noexcept { return support_threshold_; }
  /// Indices with w_i >= support_threshold, ascending.
  std::vector<std::size_t> support() const;

 private:
  Eigen::VectorXd weights_;
  double support_threshold_ = kDefaultSupportThreshold;
};

/// sum_i w_i z_i z_i^T for model m of the grid; symmetrized.
Eigen::MatrixXd information_matrix(const DesignGrid& grid, std::size_t model,
                                   const Eigen::Ref<const Eigen::VectorXd>& w);
Eigen::MatrixXd information_matrix(const DesignGrid& grid, std::size_t model, const Design& w);

/// sqrt( integral_a^b z(x) z(x)^T dx ) using Gauss-Legendre quadrature and a
/// symmetric eigendecomposition. Only defined for one-dimensional models.
Eigen::MatrixXd integral_L_matrix(const RegressionModel& model, double a, double b, int nodes);

/// Symmetric PSD square root; eigenvalues in [-1e-12 * scale, 0) are clamped
/// to zero, anything more negative is an error.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m);

}  // namespace modesign
