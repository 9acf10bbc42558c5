#include <Eigen/Eigenvalues>

#include "cogsim/errors.hpp"
#include "cogsim/lqr.hpp"
#include "doctest.h"

using namespace cogsim;
using Eigen::Vector2d;

TEST_CASE("scalar Riccati closed form") {
  // phi = gamma = q = r = 1: P solves P^2 - P - 1 = 0, the golden ratio.
  const Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
  LqrConfig cfg;
  cfg.q_weight = one;
  cfg.r_weight = one;
  const Eigen::MatrixXd p = riccati_solution(one, one, cfg);
  CHECK(p(0, 0) == doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-10));
  const Eigen::MatrixXd k = lqr_gain(one, one, cfg);
  CHECK(std::abs(k(0, 0) - 0.6180339887) < 1e-6);
}

TEST_CASE("zero state cost gives zero gain for the damped system") {
  AgentParams params;  // drag 0.2 keeps the velocity block stable
  const auto [phi, gamma] = build_matrices(params);
  LqrConfig cfg;
  cfg.q_weight = Eigen::MatrixXd::Zero(4, 4);
  cfg.r_weight = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXd k = lqr_gain(phi, gamma, cfg);
  CHECK(k.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("reference 2D weights stabilize the closed loop") {
  AgentParams params;
  const auto [phi, gamma] = build_matrices(params);
  const LqrConfig cfg = LqrConfig::diagonal(2.0, 0.1, params.dim);
  const Eigen::MatrixXd k = lqr_gain(phi, gamma, cfg);
  const Eigen::MatrixXd closed = phi - gamma * k;
  const Eigen::VectorXcd eig = closed.eigenvalues();
  double radius = 0.0;
  for (int i = 0; i < eig.size(); ++i) {
    radius = std::max(radius, std::abs(eig(i)));
  }
  CHECK(radius < 1.0);
}

TEST_CASE("Riccati solution is symmetric PSD with a small residual") {
  AgentParams params;
  const auto [phi, gamma] = build_matrices(params);
  LqrConfig cfg = LqrConfig::diagonal(2.0, 0.1, params.dim);
  const Eigen::MatrixXd p = riccati_solution(phi, gamma, cfg);
  CHECK((p - p.transpose()).cwiseAbs().maxCoeff() < 1e-9);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p);
  CHECK(es.eigenvalues().minCoeff() > -1e-9);
  const Eigen::MatrixXd s = cfg.r_weight + gamma.transpose() * p * gamma;
  const Eigen::MatrixXd residual =
      cfg.q_weight + phi.transpose() * p * phi -
      (gamma.transpose() * p * phi).transpose() *
          s.ldlt().solve(gamma.transpose() * p * phi) -
      p;
  CHECK(residual.cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("riccati rejects a hopeless iteration budget") {
  const Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
  LqrConfig cfg;
  cfg.q_weight = one;
  cfg.r_weight = one;
  cfg.riccati_max_iter = 2;
  cfg.riccati_tolerance = 1e-15;
  CHECK_THROWS_AS(riccati_solution(one, one, cfg), SolverError);
}

TEST_CASE("track") {
  AgentParams params;
  const LqrConfig cfg = LqrConfig::diagonal(2.0, 0.1, params.dim);
  SUBCASE("stationary reference at the current state gives zero control") {
    ReferencePath path;
    path.waypoints.push_back(Vector2d(10.0, 20.0));
    AgentState state{Vector2d(10.0, 20.0), Vector2d(0.0, 0.0)};
    const TrackResult result = track(path, state, params, cfg);
    REQUIRE(result.controls.size() == 1);
    CHECK(result.controls[0].force.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(result.trajectory[0].position.isApprox(Vector2d(10.0, 20.0)));
  }
  SUBCASE("straight-line tracking error decays after the transient") {
    ReferencePath path;
    for (int i = 0; i < 40; ++i) {
      path.waypoints.push_back(Vector2d(10.0 * i, 0.0));
    }
    AgentState state{Vector2d(0.0, 0.0), Vector2d(0.0, 0.0)};
    const TrackResult result = track(path, state, params, cfg);
    const auto error_at = [&](int step) {
      return (result.trajectory[static_cast<std::size_t>(step)].position -
              path.waypoints[static_cast<std::size_t>(step)])
          .norm();
    };
    CHECK(error_at(20) < error_at(5));
  }
  SUBCASE("large initial error saturates the control") {
    ReferencePath path;
    path.waypoints.push_back(Vector2d(500.0, 0.0));
    AgentState state{Vector2d(0.0, 0.0), Vector2d(0.0, 0.0)};
    const TrackResult result = track(path, state, params, cfg);
    CHECK(result.controls[0].force(0) == params.u_max);
  }
  SUBCASE("trajectory is the exact rollout of the controls") {
    ReferencePath path;
    for (int i = 0; i < 15; ++i) {
      path.waypoints.push_back(Vector2d(12.0 * i, 7.0 * i));
    }
    AgentState state{Vector2d(3.0, -4.0), Vector2d(1.0, 2.0)};
    const TrackResult result = track(path, state, params, cfg);
    const auto replay = rollout(state, result.controls, params);
    REQUIRE(replay.size() == result.trajectory.size());
    for (std::size_t i = 0; i < replay.size(); ++i) {
      CHECK(replay[i].position == result.trajectory[i].position);
      CHECK(replay[i].velocity == result.trajectory[i].velocity);
    }
  }
  SUBCASE("empty path is a usage error") {
    CHECK_THROWS_AS(
        track(ReferencePath{}, AgentState::zero(2), params, cfg),
        InputError);
  }
}
