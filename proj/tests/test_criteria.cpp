#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "modesign/criteria.hpp"
#include "modesign/errors.hpp"

using namespace modesign;

namespace {

CriterionSpec make_spec(CriterionKind kind, int q, std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  switch (kind) {
    case CriterionKind::D:
      return CriterionSpec::d_optimal(0);
    case CriterionKind::A:
      return CriterionSpec::a_optimal(0);
    case CriterionKind::E:
      return CriterionSpec::e_optimal(0);
    case CriterionKind::C: {
      Eigen::VectorXd c(q);
      for (int i = 0; i < q; ++i) c(i) = g(rng);
      return CriterionSpec::c_optimal(0, c);
    }
    case CriterionKind::L: {
      Eigen::MatrixXd l(q, 2);
      for (int i = 0; i < q; ++i)
        for (int j = 0; j < 2; ++j) l(i, j) = g(rng);
      return CriterionSpec::l_optimal(0, l);
    }
  }
  return {};
}

constexpr CriterionKind kSmooth[] = {CriterionKind::D, CriterionKind::A, CriterionKind::C,
                                     CriterionKind::L};
constexpr CriterionKind kAll[] = {CriterionKind::D, CriterionKind::A, CriterionKind::C,
                                  CriterionKind::L, CriterionKind::E};

}  // namespace

TEST_CASE("phi_value examples") {
  CHECK(phi_value(CriterionSpec::d_optimal(0), Eigen::Matrix2d::Identity()) == doctest::Approx(0.0));
  CHECK(phi_value(CriterionSpec::a_optimal(0), Eigen::Vector2d(2, 4).asDiagonal().toDenseMatrix()) ==
        doctest::Approx(0.75));
  CHECK(phi_value(CriterionSpec::e_optimal(0), Eigen::Vector2d(3, 1).asDiagonal().toDenseMatrix()) ==
        doctest::Approx(-1.0));
}

TEST_CASE("phi_value rejects singular matrices with the criterion index") {
  Eigen::Matrix2d m;
  m << 1, 1, 1, 1;
  try {
    phi_value(CriterionSpec::a_optimal(0), m, 3);
    FAIL("expected SingularInformationMatrix");
  } catch (const SingularInformationMatrix& e) {
    CHECK(e.criterion_index() == 3);
    CHECK(e.lambda_min() == doctest::Approx(0.0).epsilon(1e-12));
  }
  CHECK(phi_value(CriterionSpec::e_optimal(0), m) == doctest::Approx(0.0));
}

TEST_CASE("phi_gradient examples") {
  const Eigen::Matrix2d two = 2 * Eigen::Matrix2d::Identity();
  CHECK(phi_gradient(CriterionSpec::d_optimal(0), two).isApprox(-0.5 * Eigen::Matrix2d::Identity()));
  CHECK(phi_gradient(CriterionSpec::a_optimal(0), Eigen::Matrix2d::Identity())
            .isApprox(-Eigen::Matrix2d::Identity()));
  const Eigen::Matrix2d m = Eigen::Vector2d(4, 1).asDiagonal();
  Eigen::Matrix2d expect;
  expect << -1.0 / 16, 0, 0, 0;
  const Eigen::MatrixXd g = phi_gradient(CriterionSpec::c_optimal(0, Eigen::Vector2d(1, 0)), m);
  CHECK((g - expect).norm() < 1e-15);
  CHECK_THROWS_AS(phi_gradient(CriterionSpec::e_optimal(0), m), ContractViolation);
}

TEST_CASE("phi_gradient matches finite differences and is symmetric") {
  std::mt19937 rng(11);
  for (int t = 0; t < 20; ++t) {
    for (CriterionKind kind : kSmooth) {
      const int q = 3;
      const CriterionSpec spec = make_spec(kind, q, rng);
      const Eigen::MatrixXd m = testutil::random_pd(rng, q);
      const Eigen::MatrixXd g = phi_gradient(spec, m);
      CHECK(g == g.transpose());
      const Eigen::MatrixXd dir = testutil::random_pd(rng, q) - testutil::random_pd(rng, q);
      const double h = 1e-6;
      const double fd = (phi_value(spec, m + h * dir) - phi_value(spec, m - h * dir)) / (2 * h);
      const double an = (g.cwiseProduct(dir)).sum();
      CHECK(std::abs(fd - an) <= 1e-5 * std::max(1.0, std::abs(an)));
    }
  }
}

TEST_CASE("dispersion examples") {
  const auto g = testutil::line_grid({-1, 1}, 1);
  const Eigen::VectorXd d = dispersion(CriterionSpec::d_optimal(0), g, Eigen::Vector2d(0.5, 0.5));
  CHECK(std::abs(d(0)) < 1e-14);
  CHECK(std::abs(d(1)) < 1e-14);

  const auto single = testutil::line_grid({0.3}, 0);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
  for (CriterionKind kind : {CriterionKind::D, CriterionKind::A}) {
    std::mt19937 rng(1);
    CHECK(std::abs(dispersion(make_spec(kind, 1, rng), single, one)(0)) < 1e-14);
  }
}

TEST_CASE("dispersion is nonpositive at the D-optimal quadratic design") {
  // D-optimal design for (1, x, x^2) on [-1, 1]: equal mass at -1, 0, 1.
  const auto g = testutil::line_grid(testutil::linspace(-1, 1, 21), 2);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(21);
  w(0) = w(10) = w(20) = 1.0 / 3;
  const Eigen::VectorXd d = dispersion(CriterionSpec::d_optimal(0), g, w);
  CHECK(d.maxCoeff() <= 1e-12);
  CHECK(std::abs(d(0)) < 1e-12);
  CHECK(std::abs(d(10)) < 1e-12);
  CHECK(std::abs(d(20)) < 1e-12);
}

TEST_CASE("dispersion equals the directional derivative toward each vertex") {
  std::mt19937 rng(5);
  const auto g = testutil::line_grid(testutil::linspace(-1, 1, 9), 2);
  for (int t = 0; t < 25; ++t) {
    for (CriterionKind kind : kSmooth) {
      const CriterionSpec spec = make_spec(kind, 3, rng);
      const Eigen::VectorXd w = testutil::random_simplex(rng, 9, 0.05);
      const Eigen::VectorXd d = dispersion(spec, g, w);
      Eigen::VectorXd grad(9);
      for (Eigen::Index j = 0; j < 9; ++j) {
        const double h = 1e-6;
        Eigen::VectorXd a = w, b = w;
        a(j) += h;
        b(j) -= h;
        grad(j) = (criterion_value(g, spec, a) - criterion_value(g, spec, b)) / (2 * h);
      }
      for (Eigen::Index i = 0; i < 9; ++i) {
        const double expect = grad.dot(w) - grad(i);
        CHECK(std::abs(d(i) - expect) <= 1e-5 * std::max(1.0, std::abs(expect)));
      }
    }
  }
}

TEST_CASE("weighted dispersion sums to zero") {
  std::mt19937 rng(9);
  const auto g = build_grid({{IntervalFactor{0, 15, 31}}})
                     .with_models({RegressionModel::compartment4({5.25, 1.34, 1.75, 0.13})});
  for (int t = 0; t < 20; ++t) {
    for (CriterionKind kind : kSmooth) {
      const CriterionSpec spec = make_spec(kind, 4, rng);
      const Eigen::VectorXd w = testutil::random_simplex(rng, 31, 0.01);
      const Eigen::VectorXd d = dispersion(spec, g, w);
      CHECK(std::abs(w.dot(d)) <= 1e-9 * std::max(1.0, d.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("e_dispersion") {
  const auto g = testutil::line_grid({-1, 1}, 1);
  const Eigen::Vector2d w(0.5, 0.5);
  SUBCASE("orthonormal completeness when r* = 2") {
    const EigenInfo eig = lambda_min_eig(information_matrix(g, 0, w));
    REQUIRE(eig.r_star == 2);
    const Eigen::VectorXd d = e_dispersion(g, 0, eig, Eigen::Vector2d(0.5, 0.5));
    CHECK(d.cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("r* = 1 reduces to the single-eigenvector form") {
    const auto g3 = testutil::line_grid(testutil::linspace(-1, 1, 7), 2);
    std::mt19937 rng(2);
    const Eigen::VectorXd w3 = testutil::random_simplex(rng, 7, 0.1);
    const EigenInfo eig = lambda_min_eig(information_matrix(g3, 0, w3));
    REQUIRE(eig.r_star == 1);
    const Eigen::VectorXd d = e_dispersion(g3, 0, eig, Eigen::VectorXd::Ones(1));
    const Eigen::VectorXd v = eig.eigenvectors.col(0);
    for (Eigen::Index i = 0; i < 7; ++i) {
      const double p = v.dot(g3.z(0).row(i).transpose());
      CHECK(d(i) == p * p - eig.lambda_min);
    }
  }
  SUBCASE("identical eigenvector columns give identical output") {
    EigenInfo eig = lambda_min_eig(information_matrix(g, 0, w));
    eig.eigenvectors.col(1) = eig.eigenvectors.col(0);
    const Eigen::VectorXd a = e_dispersion(g, 0, eig, Eigen::Vector2d(1, 0));
    const Eigen::VectorXd b = e_dispersion(g, 0, eig, Eigen::Vector2d(0, 1));
    CHECK(a == b);
  }
  SUBCASE("rejects bad eigen-weights") {
    const EigenInfo eig = lambda_min_eig(information_matrix(g, 0, w));
    CHECK_THROWS_AS(e_dispersion(g, 0, eig, Eigen::VectorXd::Ones(1)), ContractViolation);
    CHECK_THROWS_AS(e_dispersion(g, 0, eig, Eigen::Vector2d(0.7, 0.7)), ContractViolation);
  }
}

TEST_CASE("lambda_min_eig") {
  CHECK(lambda_min_eig(Eigen::Matrix2d::Identity()).r_star == 2);
  CHECK(lambda_min_eig(Eigen::Vector2d(1, 1 + 1e-9).asDiagonal().toDenseMatrix()).r_star == 2);
  const EigenInfo e = lambda_min_eig(Eigen::Vector2d(1, 2).asDiagonal().toDenseMatrix());
  CHECK(e.r_star == 1);
  CHECK(e.lambda_min == doctest::Approx(1.0));
  CHECK(std::abs(std::abs(e.eigenvectors(0, 0)) - 1.0) < 1e-14);

  std::mt19937 rng(4);
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd m = testutil::random_pd(rng, 4);
    const EigenInfo info = lambda_min_eig(m);
    const Eigen::MatrixXd& v = info.eigenvectors;
    CHECK((v.transpose() * v - Eigen::MatrixXd::Identity(info.r_star, info.r_star)).norm() < 1e-10);
    for (int j = 0; j < info.r_star; ++j) {
      CHECK((m * v.col(j) - info.lambda_min * v.col(j)).norm() <= 1e-8 * m.norm());
    }
  }
}

TEST_CASE("softmin surrogate stays within mu log q below lambda_min") {
  std::mt19937 rng(6);
  for (int t = 0; t < 50; ++t) {
    const int q = 2 + t % 4;
    const Eigen::MatrixXd m = testutil::random_pd(rng, q);
    const double lmin = lambda_min_eig(m).lambda_min;
    for (double mu : {1.0, 1e-2, 1e-4}) {
      const double s = softmin_eigenvalue(m, mu);
      CHECK(s <= lmin + 1e-14);
      CHECK(lmin - s <= mu * std::log(static_cast<double>(q)) + 1e-14);
    }
  }
}

TEST_CASE("phi_value is convex") {
  std::mt19937 rng(8);
  for (int t = 0; t < 30; ++t) {
    for (CriterionKind kind : kAll) {
      const CriterionSpec spec = make_spec(kind, 3, rng);
      const Eigen::MatrixXd a = testutil::random_pd(rng, 3), b = testutil::random_pd(rng, 3);
      CHECK(phi_value(spec, 0.5 * (a + b)) <=
            0.5 * phi_value(spec, a) + 0.5 * phi_value(spec, b) + 1e-10);
    }
  }
}

TEST_CASE("efficiency") {
  const auto g = testutil::line_grid({-1, 0, 1}, 1);
  const Eigen::Vector3d opt(0.5, 0, 0.5);
  for (CriterionKind kind : {CriterionKind::D, CriterionKind::A, CriterionKind::E}) {
    std::mt19937 rng(0);
    const CriterionSpec spec = make_spec(kind, 2, rng);
    const double min_phi = criterion_value(g, spec, opt);
    CHECK(efficiency(g, spec, opt, min_phi) == doctest::Approx(1.0));
  }
  SUBCASE("c efficiency is invariant to scaling c") {
    const Eigen::Vector3d w(0.2, 0.3, 0.5);
    const auto c1 = CriterionSpec::c_optimal(0, Eigen::Vector2d(1, 2));
    const auto c2 = CriterionSpec::c_optimal(0, Eigen::Vector2d(2, 4));
    const double m1 = criterion_value(g, c1, opt), m2 = criterion_value(g, c2, opt);
    CHECK(efficiency(g, c1, w, m1) == doctest::Approx(efficiency(g, c2, w, m2)).epsilon(1e-14));
  }
  SUBCASE("D efficiency is evaluated in log space") {
    CHECK(efficiency_from_value(CriterionKind::D, 4, 2000.0, 1999.0) ==
          doctest::Approx(std::exp(-0.25)));
  }
  SUBCASE("min_phi sign must fit the kind") {
    CHECK_THROWS_AS(efficiency_from_value(CriterionKind::E, 2, -1.0, 0.5), ContractViolation);
    CHECK_THROWS_AS(efficiency_from_value(CriterionKind::A, 2, 1.0, -0.5), ContractViolation);
  }
}

TEST_CASE("h_of_m") {
  for (CriterionKind kind : kAll) {
    const double min_phi = kind == CriterionKind::E ? -2.0 : 1.5;
    CHECK(h_of_m(kind, 1.0, min_phi, 3) == doctest::Approx(min_phi));
  }
  CHECK(h_of_m(CriterionKind::D, 0.5, 0.0, 2) == doctest::Approx(2 * std::log(2.0)));
  CHECK(h_of_m(CriterionKind::E, 0.9, -3.0, 2) == doctest::Approx(-2.7));
  CHECK_THROWS_AS(h_of_m(CriterionKind::A, 0.0, 1.0, 2), ContractViolation);
  CHECK_THROWS_AS(h_of_m(CriterionKind::A, 1.1, 1.0, 2), ContractViolation);

  SUBCASE("Phi <= h(m) exactly when Eff >= m") {
    std::mt19937 rng(10);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    const auto g = testutil::line_grid(testutil::linspace(-1, 1, 6), 1);
    const Eigen::VectorXd opt = (Eigen::VectorXd(6) << 0.5, 0, 0, 0, 0, 0.5).finished();
    for (int t = 0; t < 100; ++t) {
      for (CriterionKind kind : {CriterionKind::D, CriterionKind::E}) {
        const CriterionSpec spec = make_spec(kind, 2, rng);
        const double min_phi = criterion_value(g, spec, opt);
        const Eigen::VectorXd w = testutil::random_simplex(rng, 6);
        const double m = u(rng);
        const bool by_h = criterion_value(g, spec, w) <= h_of_m(kind, m, min_phi, 2);
        const bool by_eff = efficiency(g, spec, w, min_phi) >= m;
        CHECK(by_h == by_eff);
      }
    }
  }
}

TEST_CASE("h_reciprocal_derivative") {
  CHECK(h_reciprocal_derivative(CriterionKind::D, 2.0, 0.3, 4) == doctest::Approx(2.0));
  CHECK(h_reciprocal_derivative(CriterionKind::E, 1.0, -3.0, 2) == doctest::Approx(3.0));
  CHECK(h_reciprocal_derivative(CriterionKind::A, 1.7, 5.0, 2) == doctest::Approx(5.0));
  CHECK_THROWS_AS(h_reciprocal_derivative(CriterionKind::A, 0.0, 5.0, 2), ContractViolation);
  for (CriterionKind kind : kAll) {
    const double min_phi = kind == CriterionKind::E ? -1.3 : 2.2;
    for (double t : {1.01, 1.17, 2.5}) {
      const double h = 1e-6;
      const double fd =
          (h_of_m(kind, 1.0 / (t + h), min_phi, 3) - h_of_m(kind, 1.0 / (t - h), min_phi, 3)) /
          (2 * h);
      CHECK(std::abs(fd - h_reciprocal_derivative(kind, t, min_phi, 3)) <= 1e-6);
    }
  }
}

TEST_CASE("CriterionSpec validation") {
  CHECK_THROWS_AS(CriterionSpec::c_optimal(0, Eigen::Vector2d::Zero()).validate(2),
                  ContractViolation);
  CHECK_THROWS_AS(CriterionSpec::c_optimal(0, Eigen::Vector3d::Ones()).validate(2),
                  ContractViolation);
  CHECK_THROWS_AS(CriterionSpec::l_optimal(0, Eigen::MatrixXd::Zero(2, 2)).validate(2),
                  ContractViolation);
  CHECK_NOTHROW(CriterionSpec::l_optimal(0, Eigen::MatrixXd::Ones(2, 3)).validate(2));
}
