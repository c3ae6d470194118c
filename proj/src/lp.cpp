#include "modesign/lp.hpp"

#include <cmath>
#include <stdexcept>

namespace modesign {

namespace {

constexpr double kPivotTol = 1e-10;
constexpr double kRatioTol = 1e-10;
constexpr double kCostTol = 1e-10;

using Tableau = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Phase { One, Two };

class Simplex {
 public:
  Simplex(Tableau t, std::vector<Eigen::Index> basis, std::vector<bool> enterable)
      : t_(std::move(t)), basis_(std::move(basis)), enterable_(std::move(enterable)) {
    rows_ = t_.rows() - 1;
    cols_ = t_.cols() - 1;
  }

  Tableau& tableau() { return t_; }
  std::vector<Eigen::Index>& basis() { return basis_; }
  std::vector<bool>& enterable() { return enterable_; }
  int pivots() const { return pivots_; }

  void pivot(Eigen::Index r, Eigen::Index c) {
    t_.row(r) /= t_(r, c);
    for (Eigen::Index i = 0; i <= rows_; ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[r] = c;
    ++pivots_;
  }

  // Reduced costs live in the last row; rhs in the last column.
  LpStatus run() {
    const long degenerate_limit = 50 * std::max<long>(1, rows_);
    long degenerate = 0;
    const long max_pivots = 100000 + 200 * (rows_ + cols_);
    for (long it = 0; it < max_pivots; ++it) {
      const bool bland = degenerate >= degenerate_limit;
      Eigen::Index enter = -1;
      double best = -kCostTol;
      for (Eigen::Index j = 0; j < cols_; ++j) {
        if (!enterable_[j]) continue;
        const double d = t_(rows_, j);
        if (d < best) {
          enter = j;
          if (bland) break;
          best = d;
        }
      }
      if (enter < 0) return LpStatus::Optimal;

      Eigen::Index leave = -1;
      double ratio = 0.0;
      for (Eigen::Index i = 0; i < rows_; ++i) {
        const double a = t_(i, enter);
        if (a <= kPivotTol) continue;
        const double r = std::max(0.0, t_(i, cols_)) / a;
        if (leave < 0 || r < ratio - kRatioTol ||
            (r <= ratio + kRatioTol && basis_[i] < basis_[leave])) {
          leave = i;
          ratio = r;
        }
      }
      if (leave < 0) return LpStatus::Unbounded;
      if (ratio <= kRatioTol) ++degenerate;
      pivot(leave, enter);
    }
    throw std::runtime_error("simplex did not terminate within the pivot limit");
  }

 private:
  Tableau t_;
  std::vector<Eigen::Index> basis_;
  std::vector<bool> enterable_;
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  int pivots_ = 0;
};

void check_dimensions(const LinearProgram& lp) {
  const auto n = lp.num_vars();
  if (lp.A_ub.rows() != lp.b_ub.size() || (lp.A_ub.rows() > 0 && lp.A_ub.cols() != n)) {
    throw std::invalid_argument("inequality rows do not match the variable count");
  }
  if (lp.A_eq.rows() != lp.b_eq.size() || (lp.A_eq.rows() > 0 && lp.A_eq.cols() != n)) {
    throw std::invalid_argument("equality rows do not match the variable count");
  }
  if (!lp.bounds.empty() && static_cast<Eigen::Index>(lp.bounds.size()) != n) {
    throw std::invalid_argument("variable bounds do not match the variable count");
  }
  if (!lp.objective.allFinite() || !lp.A_ub.allFinite() || !lp.b_ub.allFinite() ||
      !lp.A_eq.allFinite() || !lp.b_eq.allFinite()) {
    throw std::invalid_argument("linear program has non-finite data");
  }
}

}  // namespace

std::string to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal:
      return "Optimal";
    case LpStatus::Infeasible:
      return "Infeasible";
    case LpStatus::Unbounded:
      return "Unbounded";
  }
  return "?";
}

LpResult lp_solve(const LinearProgram& lp) {
  check_dimensions(lp);
  const Eigen::Index n = lp.num_vars();
  const Eigen::Index m_ub = lp.A_ub.rows();
  const Eigen::Index m_eq = lp.A_eq.rows();
  const Eigen::Index m = m_ub + m_eq;

  // Structural columns: one per nonnegative variable, two per free one.
  std::vector<Eigen::Index> pos(n), neg(n, -1);
  Eigen::Index ns = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    pos[j] = ns++;
    if (!lp.bounds.empty() && lp.bounds[j] == LinearProgram::Bound::Free) neg[j] = ns++;
  }

  // Standardized rows: sign * (row) so that rhs >= 0.
  Eigen::MatrixXd a_std = Eigen::MatrixXd::Zero(m, ns + m_ub);
  Eigen::VectorXd b_std(m);
  Eigen::VectorXd sign(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const bool ub = r < m_ub;
    const double b = ub ? lp.b_ub(r) : lp.b_eq(r - m_ub);
    sign(r) = b < 0.0 ? -1.0 : 1.0;
    b_std(r) = sign(r) * b;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = sign(r) * (ub ? lp.A_ub(r, j) : lp.A_eq(r - m_ub, j));
      a_std(r, pos[j]) = v;
      if (neg[j] >= 0) a_std(r, neg[j]) = -v;
    }
    if (ub) a_std(r, ns + r) = sign(r);
  }

  // Rows that cannot use their slack as the starting basic variable get an
  // artificial column.
  std::vector<Eigen::Index> basis(m);
  std::vector<Eigen::Index> artificial_row;
  for (Eigen::Index r = 0; r < m; ++r) {
    if (r < m_ub && sign(r) > 0.0) {
      basis[r] = ns + r;
    } else {
      artificial_row.push_back(r);
    }
  }
  const Eigen::Index n_art = static_cast<Eigen::Index>(artificial_row.size());
  const Eigen::Index cols = ns + m_ub + n_art;
  Tableau t = Tableau::Zero(m + 1, cols + 1);
  t.topLeftCorner(m, ns + m_ub) = a_std;
  t.col(cols).head(m) = b_std;
  for (Eigen::Index a = 0; a < n_art; ++a) {
    const Eigen::Index r = artificial_row[a];
    t(r, ns + m_ub + a) = 1.0;
    basis[r] = ns + m_ub + a;
  }

  // Phase 1 reduced costs for min sum(artificials).
  for (Eigen::Index a = 0; a < n_art; ++a) {
    t.row(m) -= t.row(artificial_row[a]);
    t(m, ns + m_ub + a) = 0.0;
  }
  std::vector<bool> enterable(cols, true);
  Simplex sx(std::move(t), std::move(basis), std::move(enterable));

  LpResult result;
  const double b_scale = 1.0 + std::max(lp.b_ub.size() ? lp.b_ub.cwiseAbs().maxCoeff() : 0.0,
                                        lp.b_eq.size() ? lp.b_eq.cwiseAbs().maxCoeff() : 0.0);
  if (n_art > 0) {
    sx.run();
    result.phase1_residual = std::max(0.0, -sx.tableau()(m, cols));
    if (result.phase1_residual > 1e-9 * b_scale) {
      result.status = LpStatus::Infeasible;
      result.pivots = sx.pivots();
      return result;
    }
    // Pivot zero-level artificials out where a structural column allows it.
    for (Eigen::Index r = 0; r < m; ++r) {
      if (sx.basis()[r] < ns + m_ub) continue;
      for (Eigen::Index j = 0; j < ns + m_ub; ++j) {
        if (std::abs(sx.tableau()(r, j)) > kPivotTol) {
          sx.pivot(r, j);
          break;
        }
      }
    }
    for (Eigen::Index a = 0; a < n_art; ++a) sx.enterable()[ns + m_ub + a] = false;
  }

  // Phase 2 reduced costs.
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(cols);
  for (Eigen::Index j = 0; j < n; ++j) {
    cost(pos[j]) = lp.objective(j);
    if (neg[j] >= 0) cost(neg[j]) = -lp.objective(j);
  }
  Tableau& tab = sx.tableau();
  tab.row(m).setZero();
  tab.row(m).head(cols) = cost.transpose();
  for (Eigen::Index r = 0; r < m; ++r) {
    const double cb = cost(sx.basis()[r]);
    if (cb != 0.0) tab.row(m) -= cb * tab.row(r);
  }
  const LpStatus st = sx.run();
  result.pivots = sx.pivots();
  if (st == LpStatus::Unbounded) {
    result.status = LpStatus::Unbounded;
    return result;
  }

  Eigen::VectorXd xs = Eigen::VectorXd::Zero(cols);
  for (Eigen::Index r = 0; r < m; ++r) xs(sx.basis()[r]) = std::max(0.0, tab(r, cols));
  result.x.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    result.x(j) = xs(pos[j]) - (neg[j] >= 0 ? xs(neg[j]) : 0.0);
  }
  result.objective_value = lp.objective.dot(result.x);
  result.status = LpStatus::Optimal;

  // Multipliers from B^T y = c_B on the standardized rows, then unflip.
  if (m > 0) {
    Eigen::MatrixXd bmat(m, m);
    Eigen::VectorXd cb(m);
    for (Eigen::Index r = 0; r < m; ++r) {
      const Eigen::Index j = sx.basis()[r];
      if (j < ns + m_ub) {
        bmat.col(r) = a_std.col(j);
      } else {
        bmat.col(r) = Eigen::VectorXd::Unit(m, artificial_row[j - ns - m_ub]);
      }
      cb(r) = cost(j);
    }
    const Eigen::VectorXd y = bmat.transpose().partialPivLu().solve(cb);
    const Eigen::VectorXd y_orig = y.cwiseProduct(sign);
    result.duals_ub = y_orig.head(m_ub);
    result.duals_eq = y_orig.tail(m_eq);
  }
  return result;
}

}  // namespace modesign
