#include "modesign/model.hpp"

#include <cmath>
#include <sstream>

#include "modesign/errors.hpp"

namespace modesign {

namespace {

std::string format_point(std::span<const double> x) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) os << ", ";
    os << x[i];
  }
  os << ')';
  return os.str();
}

void require_dimension(const RegressionModel& m, std::span<const double> x) {
  if (static_cast<int>(x.size()) != m.dimension()) {
    throw ContractViolation(to_string(m.kind()) + " model expects " +
                            std::to_string(m.dimension()) + " design coordinates, got " +
                            std::to_string(x.size()));
  }
}

double monomial_value(const RegressionModel::Monomial& e, std::span<const double> x) {
  double v = 1.0;
  for (std::size_t d = 0; d < e.size(); ++d) v *= std::pow(x[d], e[d]);
  return v;
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Linear:
      return "linear";
    case ModelKind::Compartment4:
      return "compartment4";
    case ModelKind::Emax3:
      return "emax3";
    case ModelKind::Logistic4:
      return "logistic4";
    case ModelKind::PolyInteraction:
      return "poly_interaction";
  }
  return "unknown";
}

RegressionModel RegressionModel::linear(std::vector<Monomial> basis) {
  if (basis.empty()) throw ContractViolation("linear model needs at least one basis term");
  const auto p = basis.front().size();
  if (p == 0) throw ContractViolation("linear model basis terms need at least one exponent");
  for (const auto& m : basis) {
    if (m.size() != p) throw ContractViolation("linear model basis terms differ in dimension");
    for (int e : m) {
      if (e < 0) throw ContractViolation("linear model exponents must be nonnegative");
    }
  }
  RegressionModel model(ModelKind::Linear, Eigen::VectorXd::Zero(basis.size()),
                        static_cast<int>(p));
  model.basis_ = std::move(basis);
  return model;
}

RegressionModel RegressionModel::compartment4(Eigen::Vector4d theta) {
  return RegressionModel(ModelKind::Compartment4, theta, 1);
}

RegressionModel RegressionModel::emax3(Eigen::Vector3d theta) {
  return RegressionModel(ModelKind::Emax3, theta, 1);
}

RegressionModel RegressionModel::logistic4(Eigen::Vector4d theta) {
  if (theta(3) == 0.0) throw ContractViolation("logistic4 needs a nonzero slope parameter");
  return RegressionModel(ModelKind::Logistic4, theta, 1);
}

RegressionModel RegressionModel::poly_interaction() {
  RegressionModel model(ModelKind::PolyInteraction, Eigen::VectorXd::Zero(5), 2);
  model.basis_ = {{0, 0}, {1, 0}, {0, 1}, {1, 1}, {0, 2}};
  return model;
}

int RegressionModel::num_params() const noexcept {
  switch (kind_) {
    case ModelKind::Linear:
    case ModelKind::PolyInteraction:
      return static_cast<int>(basis_.size());
    default:
      return static_cast<int>(theta_.size());
  }
}

bool RegressionModel::linear_in_theta() const noexcept {
  return kind_ == ModelKind::Linear || kind_ == ModelKind::PolyInteraction;
}

double RegressionModel::response(std::span<const double> x, const Eigen::VectorXd& th) const {
  require_dimension(*this, x);
  if (th.size() != num_params()) throw ContractViolation("parameter vector has wrong length");
  switch (kind_) {
    case ModelKind::Linear:
    case ModelKind::PolyInteraction: {
      double f = 0.0;
      for (std::size_t j = 0; j < basis_.size(); ++j) f += th(j) * monomial_value(basis_[j], x);
      return f;
    }
    case ModelKind::Compartment4:
      return th(0) * std::exp(-th(1) * x[0]) + th(2) * std::exp(-th(3) * x[0]);
    case ModelKind::Emax3:
      return th(0) + th(1) * x[0] / (th(2) + x[0]);
    case ModelKind::Logistic4:
      return th(0) + th(1) / (1.0 + std::exp((th(2) - x[0]) / th(3)));
  }
  return 0.0;
}

Eigen::VectorXd RegressionModel::gradient(std::span<const double> x) const {
  require_dimension(*this, x);
  Eigen::VectorXd z(num_params());
  const Eigen::VectorXd& th = theta_;
  switch (kind_) {
    case ModelKind::Linear:
    case ModelKind::PolyInteraction:
      for (std::size_t j = 0; j < basis_.size(); ++j) z(j) = monomial_value(basis_[j], x);
      break;
    case ModelKind::Compartment4: {
      const double x0 = x[0];
      const double e2 = std::exp(-th(1) * x0);
      const double e4 = std::exp(-th(3) * x0);
      z << e2, -th(0) * x0 * e2, e4, -th(2) * x0 * e4;
      break;
    }
    case ModelKind::Emax3: {
      const double x0 = x[0];
      const double denom = th(2) + x0;
      if (denom == 0.0) {
        throw ModelEvaluationError("emax3 gradient undefined at x = " + format_point(x) +
                                   " (theta3 + x = 0)");
      }
      z << 1.0, x0 / denom, -th(1) * x0 / (denom * denom);
      break;
    }
    case ModelKind::Logistic4: {
      const double x0 = x[0];
      const double e = std::exp((th(2) - x0) / th(3));
      if (!std::isfinite(e)) {
        throw ModelEvaluationError("logistic4 exponential overflows at x = " + format_point(x));
      }
      const double s = 1.0 / (1.0 + e);
      const double es2 = e * s * s;  // e / (1 + e)^2
      z << 1.0, s, -th(1) * es2 / th(3), th(1) * es2 * (th(2) - x0) / (th(3) * th(3));
      break;
    }
  }
  if (!z.allFinite()) {
    throw ModelEvaluationError(to_string(kind_) + " gradient is not finite at x = " +
                               format_point(x));
  }
  return z;
}

Eigen::VectorXd gradient_vector(const RegressionModel& model, std::span<const double> point) {
  return model.gradient(point);
}

}  // namespace modesign
