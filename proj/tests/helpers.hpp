#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "modesign/grid.hpp"
#include "modesign/model.hpp"
#include "modesign/solve.hpp"

namespace testutil {

inline modesign::DesignGrid line_grid(std::vector<double> xs, int degree) {
  modesign::PointMatrix pts(static_cast<Eigen::Index>(xs.size()), 1);
  for (std::size_t i = 0; i < xs.size(); ++i) pts(static_cast<Eigen::Index>(i), 0) = xs[i];
  std::vector<modesign::RegressionModel::Monomial> basis;
  for (int d = 0; d <= degree; ++d) basis.push_back({d});
  return modesign::DesignGrid(pts).with_models({modesign::RegressionModel::linear(basis)});
}

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
  return out;
}

inline Eigen::VectorXd random_simplex(std::mt19937& rng, Eigen::Index n, double floor = 0.0) {
  std::exponential_distribution<double> e(1.0);
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) w(i) = e(rng) + floor;
  return w / w.sum();
}

inline Eigen::MatrixXd random_pd(std::mt19937& rng, int q) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd a(q, q);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) a(i, j) = g(rng);
  return a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(q, q);
}

inline modesign::MultiObjectiveProblem single_problem(modesign::DesignGrid grid,
                                                      modesign::CriterionSpec spec) {
  modesign::MultiObjectiveProblem p;
  p.grid = std::move(grid);
  p.specs = {std::move(spec)};
  p.kind = modesign::ProblemKind::Single;
  return p;
}

}  // namespace testutil
