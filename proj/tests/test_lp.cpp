#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <optional>
#include <random>

#include "lp_oracle.hpp"
#include "modesign/lp.hpp"

using namespace modesign;
using lporacle::OracleResult;
using lporacle::random_lp;
using lporacle::vertex_oracle;

namespace {

LinearProgram ub_only(Eigen::VectorXd c, Eigen::MatrixXd a, Eigen::VectorXd b) {
  LinearProgram lp;
  lp.objective = std::move(c);
  lp.A_ub = std::move(a);
  lp.b_ub = std::move(b);
  lp.A_eq.resize(0, lp.objective.size());
  lp.b_eq.resize(0);
  return lp;
}

}  // namespace

TEST_CASE("lp examples") {
  SUBCASE("covering row") {
    const auto lp = ub_only(Eigen::Vector2d(1, 1), Eigen::RowVector2d(-1, -2), Eigen::VectorXd::Constant(1, -1));
    const LpResult r = lp_solve(lp);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.x(0) == doctest::Approx(0.0));
    CHECK(r.x(1) == doctest::Approx(0.5));
    CHECK(r.objective_value == doctest::Approx(0.5));
  }
  SUBCASE("infeasible") {
    const auto lp = ub_only(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Constant(1, -1));
    CHECK(lp_solve(lp).status == LpStatus::Infeasible);
  }
  SUBCASE("unbounded without rows") {
    const auto lp = ub_only(Eigen::VectorXd::Constant(1, -1), Eigen::MatrixXd(0, 1), Eigen::VectorXd(0));
    CHECK(lp_solve(lp).status == LpStatus::Unbounded);
  }
  SUBCASE("free variable") {
    // min x s.t. x >= -3 (as -x <= 3), x free.
    auto lp = ub_only(Eigen::VectorXd::Constant(1, 1), -Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Constant(1, 3));
    lp.bounds = {LinearProgram::Bound::Free};
    const LpResult r = lp_solve(lp);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.x(0) == doctest::Approx(-3.0));
  }
  SUBCASE("equality rows") {
    // min x1 + 2 x2 s.t. x1 + x2 = 1.
    LinearProgram lp;
    lp.objective = Eigen::Vector2d(1, 2);
    lp.A_ub.resize(0, 2);
    lp.b_ub.resize(0);
    lp.A_eq = Eigen::RowVector2d(1, 1);
    lp.b_eq = Eigen::VectorXd::Constant(1, 1);
    const LpResult r = lp_solve(lp);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.x.isApprox(Eigen::Vector2d(1, 0)));
    CHECK(r.duals_eq(0) == doctest::Approx(1.0));
  }
}

TEST_CASE("lp rejects malformed input") {
  auto lp = ub_only(Eigen::Vector2d(1, 1), Eigen::MatrixXd::Ones(1, 3), Eigen::VectorXd::Ones(1));
  CHECK_THROWS_AS(lp_solve(lp), std::invalid_argument);
  lp = ub_only(Eigen::Vector2d(1, NAN), Eigen::MatrixXd::Ones(1, 2), Eigen::VectorXd::Ones(1));
  CHECK_THROWS_AS(lp_solve(lp), std::invalid_argument);
  lp = ub_only(Eigen::Vector2d(1, 1), Eigen::MatrixXd::Ones(1, 2), Eigen::VectorXd::Ones(1));
  lp.bounds = {LinearProgram::Bound::Free};
  CHECK_THROWS_AS(lp_solve(lp), std::invalid_argument);
}

TEST_CASE("lp agrees with vertex enumeration on random small problems") {
  std::mt19937 rng(20240101);
  int optimal = 0, infeasible = 0, unbounded = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const LinearProgram lp = random_lp(rng);
    const OracleResult want = vertex_oracle(lp);
    const LpResult got = lp_solve(lp);
    CAPTURE(trial);
    REQUIRE(got.status == want.status);
    if (want.status == LpStatus::Optimal) {
      ++optimal;
      CHECK(std::abs(got.objective_value - want.value) <= 1e-8);
      CHECK(((lp.A_ub * got.x - lp.b_ub).array() <= 1e-9 * (1 + lp.b_ub.cwiseAbs().maxCoeff())).all());
      CHECK((got.x.array() >= -1e-12).all());
    } else if (want.status == LpStatus::Infeasible) {
      ++infeasible;
    } else {
      ++unbounded;
    }
  }
  // The generator should exercise every outcome.
  CHECK(optimal > 20);
  CHECK(infeasible > 5);
  CHECK(unbounded > 5);
}

TEST_CASE("lp multipliers close the duality gap") {
  std::mt19937 rng(99);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    LinearProgram lp = random_lp(rng);
    lp.A_eq.resize(0, lp.num_vars());
    lp.b_eq.resize(0);
    const LpResult r = lp_solve(lp);
    if (r.status != LpStatus::Optimal) continue;
    ++checked;
    CHECK(std::abs(lp.objective.dot(r.x) - lp.b_ub.dot(r.duals_ub)) <= 1e-8);
    // Dual feasibility of min c.x, Ax <= b, x >= 0: y <= 0, A^T y <= c.
    CHECK((r.duals_ub.array() <= 1e-9).all());
    CHECK(((lp.A_ub.transpose() * r.duals_ub - lp.objective).array() <= 1e-9).all());
  }
  CHECK(checked > 20);
}

TEST_CASE("row permutations do not change the outcome") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const LinearProgram lp = random_lp(rng);
    const LpResult a = lp_solve(lp);
    std::vector<int> perm(static_cast<std::size_t>(lp.A_ub.rows()));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    LinearProgram p = lp;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      p.A_ub.row(static_cast<Eigen::Index>(i)) = lp.A_ub.row(perm[i]);
      p.b_ub(static_cast<Eigen::Index>(i)) = lp.b_ub(perm[i]);
    }
    const LpResult b = lp_solve(p);
    CHECK(a.status == b.status);
    if (a.status == LpStatus::Optimal) {
      CHECK(std::abs(a.objective_value - b.objective_value) <= 1e-9);
    }
  }
}

TEST_CASE("degenerate problem terminates") {
  // Many redundant rows through the optimal vertex.
  const int m = 40;
  Eigen::MatrixXd a(m, 2);
  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) {
    const double t = static_cast<double>(i) / m;
    a.row(i) << 1 + t, 1 - t;
    b(i) = 0.5 * (1 + t) + 0.5 * (1 - t);  // every row passes through (0.5, 0.5)
  }
  const auto lp = ub_only(Eigen::Vector2d(-1, -1), a, b);
  const LpResult r = lp_solve(lp);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.objective_value == doctest::Approx(-1.0));
}
