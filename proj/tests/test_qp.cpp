#include <Eigen/Dense>

#include "cogsim/qp.hpp"
#include "cogsim/rng.hpp"
#include "doctest.h"

using namespace cogsim;

namespace {

QpProblem scalar_problem() {
  QpProblem qp;
  qp.hessian = 2.0 * Eigen::MatrixXd::Identity(1, 1);  // x^2
  qp.linear = Eigen::VectorXd::Zero(1);
  qp.eq_matrix.resize(0, 1);
  qp.eq_rhs.resize(0);
  qp.in_matrix.resize(0, 1);
  qp.in_rhs.resize(0);
  return qp;
}

}  // namespace

TEST_CASE("active bound: min x^2 subject to x >= 3") {
  QpProblem qp = scalar_problem();
  qp.lower = Eigen::VectorXd::Constant(1, 3.0);
  const QpSolution sol = solve_qp(qp);
  REQUIRE(sol.status == QpStatus::optimal);
  CHECK(sol.values(0) == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(sol.objective == doctest::Approx(9.0).epsilon(1e-10));
}

TEST_CASE("unconstrained: min (x-1)^2") {
  QpProblem qp = scalar_problem();
  qp.linear(0) = -2.0;  // (x-1)^2 = x^2 - 2x + 1
  qp.constant = 1.0;
  const QpSolution sol = solve_qp(qp);
  REQUIRE(sol.status == QpStatus::optimal);
  CHECK(sol.values(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sol.objective == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("contradictory bounds are infeasible") {
  QpProblem qp = scalar_problem();
  qp.lower = Eigen::VectorXd::Constant(1, 1.0);
  qp.upper = Eigen::VectorXd::Constant(1, 0.0);
  CHECK(solve_qp(qp).status == QpStatus::infeasible);
}

TEST_CASE("equality constraints resolve against the closed form") {
  // min 0.5 x'Hx + c'x  s.t.  a'x = b has the KKT solution
  // [H a; a' 0][x; l] = [-c; b].
  RngStream rng(51);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 4;
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        m(i, j) = rng.uniform(-1.0, 1.0);
      }
    }
    QpProblem qp;
    qp.hessian = m * m.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
    qp.linear = Eigen::VectorXd::NullaryExpr(
        n, [&rng](Eigen::Index) { return rng.uniform(-2.0, 2.0); });
    qp.eq_matrix.resize(1, n);
    for (int j = 0; j < n; ++j) {
      qp.eq_matrix(0, j) = rng.uniform(-1.0, 1.0);
    }
    qp.eq_rhs = Eigen::VectorXd::Constant(1, rng.uniform(-1.0, 1.0));
    qp.in_matrix.resize(0, n);
    qp.in_rhs.resize(0);

    Eigen::MatrixXd kkt(n + 1, n + 1);
    kkt.setZero();
    kkt.topLeftCorner(n, n) = qp.hessian;
    kkt.topRightCorner(n, 1) = qp.eq_matrix.transpose();
    kkt.bottomLeftCorner(1, n) = qp.eq_matrix;
    Eigen::VectorXd rhs(n + 1);
    rhs << -qp.linear, qp.eq_rhs;
    const Eigen::VectorXd expected = kkt.lu().solve(rhs).head(n);

    const QpSolution sol = solve_qp(qp);
    REQUIRE(sol.status == QpStatus::optimal);
    CHECK((sol.values - expected).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("random inequality problems satisfy KKT against a reference") {
  // Compare against projected-style enumeration: for small n and few rows,
  // enumerate active subsets and take the best feasible KKT point.
  RngStream rng(52);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 3;
    const int m = 4;
    Eigen::MatrixXd m0(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        m0(i, j) = rng.uniform(-1.0, 1.0);
      }
    }
    QpProblem qp;
    qp.hessian = m0 * m0.transpose() + Eigen::MatrixXd::Identity(n, n);
    qp.linear = Eigen::VectorXd::NullaryExpr(
        n, [&rng](Eigen::Index) { return rng.uniform(-3.0, 3.0); });
    qp.eq_matrix.resize(0, n);
    qp.eq_rhs.resize(0);
    qp.in_matrix.resize(m, n);
    qp.in_rhs.resize(m);
    for (int r = 0; r < m; ++r) {
      for (int j = 0; j < n; ++j) {
        qp.in_matrix(r, j) = rng.uniform(-1.0, 1.0);
      }
      qp.in_rhs(r) = rng.uniform(0.2, 2.0);
    }

    double best = std::numeric_limits<double>::infinity();
    for (int mask = 0; mask < (1 << m); ++mask) {
      std::vector<int> active;
      for (int r = 0; r < m; ++r) {
        if (mask & (1 << r)) {
          active.push_back(r);
        }
      }
      const int k = static_cast<int>(active.size());
      Eigen::MatrixXd kkt(n + k, n + k);
      kkt.setZero();
      kkt.topLeftCorner(n, n) = qp.hessian;
      Eigen::VectorXd rhs(n + k);
      rhs.head(n) = -qp.linear;
      for (int i = 0; i < k; ++i) {
        kkt.block(n + i, 0, 1, n) = qp.in_matrix.row(active[static_cast<std::size_t>(i)]);
        kkt.block(0, n + i, n, 1) =
            qp.in_matrix.row(active[static_cast<std::size_t>(i)]).transpose();
        rhs(n + i) = qp.in_rhs(active[static_cast<std::size_t>(i)]);
      }
      const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
      const Eigen::VectorXd x = sol.head(n);
      const Eigen::VectorXd mult = sol.tail(k);
      if ((qp.in_matrix * x - qp.in_rhs).maxCoeff() > 1e-8) {
        continue;
      }
      if (k > 0 && mult.minCoeff() < -1e-8) {
        continue;
      }
      best = std::min(best, 0.5 * x.dot(qp.hessian * x) + qp.linear.dot(x));
    }

    const QpSolution sol = solve_qp(qp);
    REQUIRE(sol.status == QpStatus::optimal);
    CHECK(sol.objective == doctest::Approx(best).epsilon(1e-7));
    CHECK((qp.in_matrix * sol.values - qp.in_rhs).maxCoeff() < 1e-8);
  }
}

TEST_CASE("semidefinite Hessian is handled by the proximal path") {
  // min (x1 - 2)^2 with x2 free but boxed: the x2 block has zero curvature.
  QpProblem qp;
  qp.hessian = Eigen::MatrixXd::Zero(2, 2);
  qp.hessian(0, 0) = 2.0;
  qp.linear = Eigen::VectorXd::Zero(2);
  qp.linear(0) = -4.0;
  qp.constant = 4.0;
  qp.eq_matrix.resize(0, 2);
  qp.eq_rhs.resize(0);
  qp.in_matrix.resize(1, 2);
  qp.in_matrix << 1.0, 1.0;  // x1 + x2 <= 1
  qp.in_rhs = Eigen::VectorXd::Constant(1, 1.0);
  qp.lower = Eigen::VectorXd::Constant(2, -5.0);
  qp.upper = Eigen::VectorXd::Constant(2, 5.0);
  const QpSolution sol = solve_qp(qp);
  REQUIRE(sol.status == QpStatus::optimal);
  // x1 wants 2 but x1 + x2 <= 1 binds only if x2 cannot absorb it; x2 may go
  // to -1 at no cost, so the optimum reaches x1 = 2 exactly.
  CHECK(sol.values(0) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(sol.objective == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
  CHECK(sol.values(0) + sol.values(1) <= 1.0 + 1e-8);
}
