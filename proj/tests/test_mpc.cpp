#include <Eigen/Dense>

#include "cogsim/bnb.hpp"
#include "cogsim/errors.hpp"
#include "cogsim/mpc.hpp"
#include "doctest.h"

using namespace cogsim;
using Eigen::Vector2d;

namespace {

MpcConfig small_cfg(int horizon, double kappa_goal = 1.0,
                    double kappa_smooth = 0.1) {
  MpcConfig cfg;
  cfg.horizon = horizon;
  cfg.kappa_goal = kappa_goal;
  cfg.kappa_smooth = kappa_smooth;
  cfg.big_m = 1e5;
  cfg.strict_margin = 0.5;
  cfg.goal_centroid = Vector2d(3.0, 2.0);
  return cfg;
}

Cuboid arena_2d() {
  return Cuboid::axis_aligned(Vector2d(-1000.0, -1000.0),
                              Vector2d(1000.0, 1000.0));
}

AgentState origin_state() { return AgentState::zero(2); }

}  // namespace

TEST_CASE("instance sizes") {
  AgentParams agent;
  SUBCASE("no cuboids is a plain QP") {
    const MIQPInstance inst =
        build_miqp(origin_state(), {}, small_cfg(2), agent, arena_2d(),
                   Vector2d(0.0, 0.0));
    CHECK(inst.num_binary == 0);
    CHECK(inst.num_continuous == 2 * (4 + 2));
    CHECK(inst.eq_matrix.rows() == 8);
  }
  SUBCASE("one cuboid over three steps") {
    const std::vector<Cuboid> avoid{
        Cuboid::axis_aligned(Vector2d(10, 10), Vector2d(20, 20))};
    const MIQPInstance inst =
        build_miqp(origin_state(), avoid, small_cfg(3), agent, arena_2d(),
                   Vector2d(0.0, 0.0));
    CHECK(inst.num_binary == 3 * 1 * 4);
    int cardinality_rows = 0;
    for (const auto& row : inst.rows) {
      if (row.kind == IneqRow::Kind::cardinality) {
        ++cardinality_rows;
        CHECK(row.rhs == 3.0);
      }
    }
    CHECK(cardinality_rows == 3);
  }
  SUBCASE("six-face 3D cell allows at most five relaxed faces") {
    AgentParams agent3;
    agent3.dim = 3;
    MpcConfig cfg = small_cfg(1);
    cfg.goal_centroid = Eigen::Vector3d(3.0, 2.0, 1.0);
    const Cuboid arena = Cuboid::axis_aligned(
        Eigen::Vector3d(-1000, -1000, -1000), Eigen::Vector3d(1000, 1000, 1000));
    const std::vector<Cuboid> avoid{Cuboid::axis_aligned(
        Eigen::Vector3d(10, 10, 10), Eigen::Vector3d(20, 20, 20))};
    const MIQPInstance inst = build_miqp(
        AgentState::zero(3), avoid, cfg, agent3, arena, Eigen::Vector3d::Zero());
    CHECK(inst.num_binary == 6);
    CHECK(inst.cell_budget() == 5);
    bool found = false;
    for (const auto& row : inst.rows) {
      if (row.kind == IneqRow::Kind::cardinality) {
        CHECK(row.rhs == 5.0);
        found = true;
      }
    }
    CHECK(found);
  }
}

TEST_CASE("big_m must dominate the worst reachable deficit") {
  AgentParams agent;
  MpcConfig cfg = small_cfg(1);
  cfg.big_m = 10.0;  // far too small for a 2 km arena
  const std::vector<Cuboid> avoid{
      Cuboid::axis_aligned(Vector2d(10, 10), Vector2d(20, 20))};
  CHECK_THROWS_AS(build_miqp(origin_state(), avoid, cfg, agent, arena_2d(),
                             Vector2d(0.0, 0.0)),
                  ConfigError);
}

TEST_CASE("objective_value examples") {
  SUBCASE("pinned at the goal with constant controls costs nothing") {
    MpcConfig cfg = small_cfg(3, 1.0, 1.0);
    std::vector<AgentState> traj(3,
                                 AgentState{cfg.goal_centroid, Vector2d(0, 0)});
    std::vector<ControlInput> controls(3, ControlInput{Vector2d(0.5, 0.5)});
    CHECK(objective_value(traj, controls, Vector2d(0.5, 0.5), cfg) ==
          doctest::Approx(0.0));
  }
  SUBCASE("goal term only") {
    MpcConfig cfg = small_cfg(1, 1.0, 0.0);
    cfg.goal_centroid = Vector2d(0.0, 0.0);
    std::vector<AgentState> traj{AgentState{Vector2d(3.0, 4.0), Vector2d(0, 0)}};
    std::vector<ControlInput> controls{ControlInput{Vector2d(0, 0)}};
    CHECK(objective_value(traj, controls, Vector2d(0, 0), cfg) ==
          doctest::Approx(25.0));
  }
  SUBCASE("smoothness term only") {
    MpcConfig cfg = small_cfg(2, 0.0, 1.0);
    std::vector<AgentState> traj(2, AgentState::zero(2));
    std::vector<ControlInput> controls{ControlInput{Vector2d(0.0, 0.0)},
                                       ControlInput{Vector2d(1.0, 0.0)}};
    CHECK(objective_value(traj, controls, Vector2d(0, 0), cfg) ==
          doctest::Approx(1.0));
  }
  SUBCASE("length mismatch is a usage error") {
    MpcConfig cfg = small_cfg(2);
    std::vector<AgentState> traj(1, AgentState::zero(2));
    std::vector<ControlInput> controls(1, ControlInput{Vector2d(0, 0)});
    CHECK_THROWS_AS(objective_value(traj, controls, Vector2d(0, 0), cfg),
                    InputError);
  }
}

TEST_CASE("decode") {
  AgentParams agent;
  SUBCASE("obstacle-free optimum matches the hand-built normal equations") {
    // T=2: only pos_2 responds to u_1, so the condensed objective in
    // U = (u1, u2) is kappa1 |p0 + 2 dt v0 + a u1 - G|^2 + smoothness,
    // with a = dt^2/m the one-step-delayed position response.
    MpcConfig cfg = small_cfg(2, 1.0, 0.1);
    const MIQPInstance inst = build_miqp(origin_state(), {}, cfg, agent,
                                         arena_2d(), Vector2d(0.0, 0.0));
    const BnbResult solved = branch_and_bound(inst);
    REQUIRE(solved.status == BnbStatus::optimal);
    auto [traj, controls] = decode(inst, solved.incumbent);

    const double a = agent.dt * agent.dt / agent.mass;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2, 2);  // per-axis (u1, u2)
    h(0, 0) = 2.0 * cfg.kappa_goal * a * a + 2.0 * cfg.kappa_smooth * 2.0;
    h(0, 1) = -2.0 * cfg.kappa_smooth;
    h(1, 0) = -2.0 * cfg.kappa_smooth;
    h(1, 1) = 2.0 * cfg.kappa_smooth;
    for (int axis = 0; axis < 2; ++axis) {
      Eigen::VectorXd c(2);
      c << 2.0 * cfg.kappa_goal * a * (0.0 - cfg.goal_centroid(axis)), 0.0;
      const Eigen::Vector2d u_axis = h.ldlt().solve(-c);
      CHECK(controls[0].force(axis) == doctest::Approx(u_axis(0)).epsilon(1e-6));
      CHECK(controls[1].force(axis) == doctest::Approx(u_axis(1)).epsilon(1e-6));
    }
    // Replay exactness.
    const auto replay = rollout(origin_state(), controls, agent);
    for (std::size_t i = 0; i < replay.size(); ++i) {
      CHECK(replay[i].position == traj[i].position);
    }
  }
  SUBCASE("cardinality-violating pattern is rejected by name") {
    const std::vector<Cuboid> avoid{
        Cuboid::axis_aligned(Vector2d(100, 100), Vector2d(200, 200))};
    MpcConfig cfg = small_cfg(1);
    const MIQPInstance inst = build_miqp(origin_state(), avoid, cfg, agent,
                                         arena_2d(), Vector2d(0.0, 0.0));
    const BnbResult solved = branch_and_bound(inst);
    REQUIRE(solved.status == BnbStatus::optimal);
    Eigen::VectorXd corrupted = solved.incumbent;
    for (int b = 0; b < inst.num_binary; ++b) {
      corrupted(inst.num_continuous + b) = 1.0;
    }
    CHECK_THROWS_WITH_AS(decode(inst, corrupted),
                         doctest::Contains("cardinality"), DecodeError);
  }
  SUBCASE("single-step horizon decodes one pair") {
    MpcConfig cfg = small_cfg(1);
    const MIQPInstance inst = build_miqp(origin_state(), {}, cfg, agent,
                                         arena_2d(), Vector2d(0.0, 0.0));
    const BnbResult solved = branch_and_bound(inst);
    REQUIRE(solved.status == BnbStatus::optimal);
    auto [traj, controls] = decode(inst, solved.incumbent);
    CHECK(traj.size() == 1);
    CHECK(controls.size() == 1);
  }
  SUBCASE("planned positions clear every cuboid by the margin") {
    const std::vector<Cuboid> avoid{
        Cuboid::axis_aligned(Vector2d(1.0, -50.0), Vector2d(2.0, 50.0))};
    MpcConfig cfg = small_cfg(6, 1.0, 0.01);
    cfg.goal_centroid = Vector2d(6.0, 0.0);
    const MIQPInstance inst = build_miqp(origin_state(), avoid, cfg, agent,
                                         arena_2d(), Vector2d(0.0, 0.0));
    const BnbResult solved = branch_and_bound(inst);
    REQUIRE(solved.has_incumbent);
    auto [traj, controls] = decode(inst, solved.incumbent);
    for (const auto& state : traj) {
      double escape = -1e9;
      for (const auto& face : avoid[0].faces()) {
        escape = std::max(escape,
                          face.normal.dot(state.position) - face.offset);
      }
      CHECK(escape >= cfg.strict_margin - 1e-6);
    }
  }
}

TEST_CASE("debug dump is stable and descriptive") {
  AgentParams agent;
  const std::vector<Cuboid> avoid{
      Cuboid::axis_aligned(Vector2d(10, 10), Vector2d(20, 20))};
  const MIQPInstance inst = build_miqp(origin_state(), avoid, small_cfg(1),
                                       agent, arena_2d(), Vector2d(0.0, 0.0));
  const std::string dump = inst.debug_dump();
  CHECK(dump.find("big_m tau=1 cuboid=0 face=0") != std::string::npos);
  CHECK(dump.find("cardinality tau=1 cuboid=0") != std::string::npos);
  CHECK(dump == inst.debug_dump());
}
