#include "modesign/grid.hpp"

#include <cmath>
#include <string>

#include "modesign/errors.hpp"
#include "quadrature.hpp"

namespace modesign {

DesignGrid::DesignGrid(PointMatrix points, std::vector<SpaceFactor> factors)
    : points_(std::move(points)), factors_(std::move(factors)) {
  if (points_.rows() < 1) throw ContractViolation("design grid needs at least one point");
  if (!points_.allFinite()) throw ContractViolation("design grid points must be finite");
}

DesignGrid DesignGrid::with_models(std::vector<RegressionModel> models) const {
  DesignGrid g(*this);
  g.models_ = std::move(models);
  g.z_.clear();
  g.z_.reserve(g.models_.size());
  for (const auto& m : g.models_) {
    if (m.dimension() != dimension()) {
      throw ContractViolation(to_string(m.kind()) + " model has dimension " +
                              std::to_string(m.dimension()) + " but the grid has dimension " +
                              std::to_string(dimension()));
    }
    Eigen::MatrixXd z(size(), m.num_params());
    for (std::size_t i = 0; i < size(); ++i) z.row(i) = m.gradient(point(i)).transpose();
    g.z_.push_back(std::move(z));
  }
  return g;
}

std::span<const double> DesignGrid::point(std::size_t i) const {
  return {points_.data() + i * points_.cols(), static_cast<std::size_t>(points_.cols())};
}

const RegressionModel& DesignGrid::model(std::size_t m) const {
  if (m >= models_.size()) throw ContractViolation("model index out of range");
  return models_[m];
}

const Eigen::MatrixXd& DesignGrid::z(std::size_t m) const {
  if (m >= z_.size()) throw ContractViolation("model index out of range");
  return z_[m];
}

DesignGrid build_grid(const SpaceSpec& spec) {
  if (spec.factors.empty()) throw std::invalid_argument("design space has no factors");
  std::vector<std::vector<double>> levels;
  for (std::size_t d = 0; d < spec.factors.size(); ++d) {
    const auto& f = spec.factors[d];
    std::vector<double> v;
    if (const auto* iv = std::get_if<IntervalFactor>(&f)) {
      if (!std::isfinite(iv->lo) || !std::isfinite(iv->hi)) {
        throw std::invalid_argument("dimension " + std::to_string(d) +
                                    ": interval bounds must be finite");
      }
      if (iv->points < 2) {
        throw std::invalid_argument("dimension " + std::to_string(d) +
                                    ": an interval needs at least 2 points, got " +
                                    std::to_string(iv->points));
      }
      if (!(iv->lo < iv->hi)) {
        throw std::invalid_argument("dimension " + std::to_string(d) +
                                    ": interval needs lo < hi");
      }
      v.resize(iv->points);
      const double span = iv->hi - iv->lo;
      for (int i = 0; i < iv->points; ++i) v[i] = iv->lo + span * i / (iv->points - 1);
    } else {
      const auto& set = std::get<SetFactor>(f);
      if (set.levels.empty()) {
        throw std::invalid_argument("dimension " + std::to_string(d) + ": finite set is empty");
      }
      for (double x : set.levels) {
        if (!std::isfinite(x)) {
          throw std::invalid_argument("dimension " + std::to_string(d) +
                                      ": set levels must be finite");
        }
      }
      v = set.levels;
    }
    levels.push_back(std::move(v));
  }

  std::size_t n = 1;
  for (const auto& v : levels) n *= v.size();
  const auto p = static_cast<Eigen::Index>(levels.size());
  PointMatrix points(static_cast<Eigen::Index>(n), p);
  // Last factor varies fastest.
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t rem = i;
    for (Eigen::Index d = p - 1; d >= 0; --d) {
      const auto& v = levels[static_cast<std::size_t>(d)];
      points(static_cast<Eigen::Index>(i), d) = v[rem % v.size()];
      rem /= v.size();
    }
  }
  return DesignGrid(std::move(points), spec.factors);
}

Design::Design(Eigen::VectorXd weights, double support_threshold)
    : weights_(std::move(weights)), support_threshold_(support_threshold) {
  if (weights_.size() == 0) throw ContractViolation("design has no weights");
  if (!weights_.allFinite()) throw ContractViolation("design weights must be finite");
  if (weights_.minCoeff() < 0.0) throw ContractViolation("design weights must be nonnegative");
  if (std::abs(weights_.sum() - 1.0) > 1e-10) {
    throw ContractViolation("design weights must sum to one");
  }
}

Design Design::uniform(std::size_t n) {
  return Design(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / n));
}

std::vector<std::size_t> Design::support() const {
  std::vector<std::size_t> s;
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    if (weights_(i) >= support_threshold_) s.push_back(static_cast<std::size_t>(i));
  }
  return s;
}

Eigen::MatrixXd information_matrix(const DesignGrid& grid, std::size_t model,
                                   const Eigen::Ref<const Eigen::VectorXd>& w) {
  const Eigen::MatrixXd& z = grid.z(model);
  if (w.size() != z.rows()) throw ContractViolation("weight vector does not match grid size");
  Eigen::MatrixXd m = z.transpose() * w.asDiagonal() * z;
  return 0.5 * (m + m.transpose());
}

Eigen::MatrixXd information_matrix(const DesignGrid& grid, std::size_t model, const Design& w) {
  return information_matrix(grid, model, w.weights());
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  Eigen::VectorXd ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -1e-12 * scale) {
      throw std::domain_error("matrix is not positive semidefinite (eigenvalue " +
                              std::to_string(ev(i)) + ")");
    }
    ev(i) = std::sqrt(std::max(ev(i), 0.0));
  }
  Eigen::MatrixXd r = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (r + r.transpose());
}

Eigen::MatrixXd integral_L_matrix(const RegressionModel& model, double a, double b, int nodes) {
  if (!(a < b)) throw ContractViolation("integral_L_matrix needs a < b");
  if (model.dimension() != 1) {
    throw ContractViolation("integral_L_matrix is only defined for one-dimensional models");
  }
  const auto rule = detail::gauss_legendre(nodes, a, b);
  const int q = model.num_params();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(q, q);
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double x = rule.nodes[k];
    const Eigen::VectorXd z = model.gradient(std::span<const double>(&x, 1));
    acc.noalias() += rule.weights[k] * z * z.transpose();
  }
  return psd_sqrt(acc);
}

}  // namespace modesign
