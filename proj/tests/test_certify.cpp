#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "modesign/certify.hpp"
#include "modesign/errors.hpp"
#include "modesign/solve.hpp"

using namespace modesign;

TEST_CASE("verify_single: D on three points") {
  const auto g = testutil::line_grid({-1, 0, 1}, 1);
  const auto spec = CriterionSpec::d_optimal(0);
  const Certificate good = verify_single(spec, g, Design(Eigen::Vector3d(0.5, 0, 0.5)), 1e-4);
  CHECK(good.verdict == Verdict::Certified);
  REQUIRE(good.curves.size() == 1);
  CHECK(std::abs(good.curves[0](0)) < 1e-12);
  CHECK(std::abs(good.curves[0](2)) < 1e-12);
  CHECK(good.curves[0](1) == doctest::Approx(-1.0));

  const Certificate bad =
      verify_single(spec, g, Design(Eigen::Vector3d(1.0 / 3, 1.0 / 3, 1.0 / 3)), 1e-4);
  CHECK(bad.verdict == Verdict::NotCertified);
  CHECK(bad.curves[0](0) > 0.0);
  CHECK(bad.curves[0](2) > 0.0);
}

TEST_CASE("verify_single: E with a repeated minimum eigenvalue") {
  const auto g = testutil::line_grid({-1, 1}, 1);
  const Certificate c =
      verify_single(CriterionSpec::e_optimal(0), g, Design(Eigen::Vector2d(0.5, 0.5)), 1e-4);
  CHECK(c.verdict == Verdict::Certified);
  REQUIRE(c.r_star.size() == 1);
  CHECK(c.r_star[0] == 2);
  REQUIRE(c.a_weights.size() == 1);
  CHECK(c.a_weights[0].size() == 2);
  CHECK(c.a_weights[0].sum() == doctest::Approx(1.0));
  CHECK(c.combined.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("verify_single: E-optimal quadratic design") {
  // For (1, x, x^2) on [-1, 1]: w = (0.2, 0.6, 0.2) on {-1, 0, 1} with a
  // simple lambda_min = 0.2, eigenvector (1, 0, -2) / sqrt(5).
  const auto g = testutil::line_grid(testutil::linspace(-1, 1, 21), 2);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(21);
  w(0) = w(20) = 0.2;
  w(10) = 0.6;
  const Certificate c = verify_single(CriterionSpec::e_optimal(0), g, Design(w), 1e-4);
  CHECK(c.r_star[0] == 1);
  CHECK(c.verdict == Verdict::Certified);
  CHECK(c.combined.maxCoeff() <= 1e-12);
}

TEST_CASE("certificate rows equal independently computed dispersions") {
  auto p = testutil::single_problem(testutil::line_grid(testutil::linspace(-1, 1, 31), 2),
                                    CriterionSpec::d_optimal(0));
  p.specs.push_back(CriterionSpec::a_optimal(0));
  p.specs.push_back(CriterionSpec::c_optimal(0, Eigen::Vector3d(1, 0.3, 0.09)));
  p.kind = ProblemKind::Constrained;
  p.bounds = {0.9, 0.5};
  presolve(p);
  const SolveResult r = solve_constrained(p);
  REQUIRE(r.status == SolveStatus::Converged);
  const Certificate c = certify(p, r.design, std::nullopt, 1e-4);
  CHECK(c.verdict == Verdict::Certified);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(c.curves[k] == dispersion(p.specs[k], p.grid, r.design.weights(), k));
  }
  // Combined curve = primary curve + sum of eta-weighted constraint curves.
  const Eigen::VectorXd rebuilt = c.curves[0] + c.eta(0) * c.curves[1] + c.eta(1) * c.curves[2];
  CHECK((rebuilt - c.combined).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, c.combined.norm()));
  CHECK(c.combined.maxCoeff() <= 1e-4 + 1e-9);
  CHECK((c.eta.array() >= 0.0).all());

  // Slack constraints carry (numerically) zero multipliers.
  const auto eff = efficiencies(p, r.design.weights());
  for (std::size_t k = 1; k < 3; ++k) {
    if (eff[k] > p.bounds[k - 1] + 1e-4) {
      const double gap = std::abs(criterion_value(p.grid, p.specs[k], r.design.weights()) -
                                  p.bound_value(k));
      CHECK(c.eta(static_cast<Eigen::Index>(k - 1)) <= 1e-4 / gap + 1e-12);
    }
  }

  const Eigen::MatrixXd table = dispersion_report(p, r.design, c);
  CHECK(table.rows() == 31);
  CHECK(table.cols() == 4);
  CHECK(table.col(3) == c.combined);
}

TEST_CASE("certification is monotone in delta") {
  std::mt19937 rng(17);
  const auto g = testutil::line_grid(testutil::linspace(-1, 1, 11), 2);
  const double deltas[] = {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  for (int t = 0; t < 30; ++t) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(11);
    w(0) = w(10) = 1.0 / 3;
    w(5) = 1.0 / 3;
    w = 0.9 * w + 0.1 * testutil::random_simplex(rng, 11);
    bool seen = false;
    for (double d : deltas) {
      const bool ok =
          verify_single(CriterionSpec::d_optimal(0), g, Design(w), d).verdict == Verdict::Certified;
      CHECK((!seen || ok));
      seen = seen || ok;
    }
  }
}

TEST_CASE("moving mass off the support breaks the certificate") {
  auto p = testutil::single_problem(testutil::line_grid(testutil::linspace(-1, 1, 41), 2),
                                    CriterionSpec::a_optimal(0));
  const SolveResult r = solve_single(p, 0);
  REQUIRE(verify_single(p.specs[0], p.grid, r.design, 1e-4).verdict == Verdict::Certified);
  Eigen::VectorXd w = 0.95 * r.design.weights();
  w(7) += 0.05;  // x = -0.65, not a support point
  CHECK(verify_single(p.specs[0], p.grid, Design(w), 1e-4).verdict == Verdict::NotCertified);
}

TEST_CASE("an infeasible design is rejected before the LP") {
  auto p = testutil::single_problem(testutil::line_grid(testutil::linspace(-1, 1, 21), 2),
                                    CriterionSpec::a_optimal(0));
  p.specs.push_back(CriterionSpec::d_optimal(0));
  p.kind = ProblemKind::Constrained;
  p.bounds = {0.99};
  presolve(p);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(21);
  w(0) = 0.5;
  w(10) = 0.25;
  w(20) = 0.25;
  const Certificate c = certify_constrained(p, Design(w), 1e-4);
  CHECK_FALSE(c.design_feasible);
  CHECK(c.verdict == Verdict::NotCertified);
}

TEST_CASE("certify rejects bad arguments") {
  auto p = testutil::single_problem(testutil::line_grid({-1, 0, 1}, 1), CriterionSpec::d_optimal(0));
  CHECK_THROWS_AS(verify_single(p.specs[0], p.grid, Design(Eigen::Vector3d(0.5, 0, 0.5)), 0.0),
                  ContractViolation);
  CHECK_THROWS_AS(verify_single(p.specs[0], p.grid, Design(Eigen::Vector2d(0.5, 0.5)), 1e-4),
                  ContractViolation);
  CHECK_THROWS_AS(certify_maximin(p, Design(Eigen::Vector3d(0.5, 0, 0.5)), 1.0, 1e-4),
                  ContractViolation);
}
