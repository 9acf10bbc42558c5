#pragma once

#include <Eigen/Core>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cogsim/agent.hpp"
#include "cogsim/geometry.hpp"

namespace cogsim {

/// Rolling-horizon planner weights and constants. kappa_goal pulls the
/// planned positions toward goal_centroid, kappa_smooth penalizes jumps
/// between consecutive controls, big_m relaxes avoidance rows face by face,
/// and strict_margin is the clearance that replaces the strict inequality.
struct MpcConfig {
  int horizon = 80;              // steps
  double kappa_goal = 1.0;       // position term weight
  double kappa_smooth = 0.001;   // control smoothness weight
  double big_m = 1e5;
  double strict_margin = 0.5;    // m
  Eigen::VectorXd goal_centroid;

  void validate() const;
};

/// One linear inequality over continuous and binary variables, kept in
/// structured form so violations can be reported by name and the instance can
/// be dumped as text. Terms reference continuous variables by index; a
/// big_m row additionally involves its own binary variable.
struct IneqRow {
  enum class Kind { big_m, cardinality, arena };
  Kind kind = Kind::big_m;
  int tau = 0;     // 1-based horizon step
  int cuboid = -1;
  int face = -1;
  std::vector<std::pair<int, double>> terms;  // continuous part
  double rhs = 0.0;

  std::string describe() const;
};

/// Problem data for the horizon plan as a mixed-integer QP:
/// continuous variables are the stacked states then controls,
/// binaries one per (step, cuboid, face). The objective applies only to the
/// continuous block; dynamics are equality rows; avoidance is big-M.
struct MIQPInstance {
  int dim = 0;
  int horizon = 0;
  int num_cuboids = 0;
  int num_continuous = 0;
  int num_binary = 0;

  Eigen::MatrixXd hessian;  // continuous block
  Eigen::VectorXd linear;
  double constant = 0.0;

  Eigen::MatrixXd eq_matrix;
  Eigen::VectorXd eq_rhs;

  std::vector<IneqRow> rows;
  Eigen::VectorXd lower, upper;  // continuous variable bounds

  // Model data carried for condensation, decoding, and checks.
  Eigen::MatrixXd phi, gamma;
  Eigen::VectorXd x0;      // stacked initial state
  Eigen::VectorXd u_prev;  // control applied before the horizon
  double big_m = 0.0;
  double margin = 0.0;
  double kappa_goal = 0.0;
  double kappa_smooth = 0.0;
  Eigen::VectorXd goal_centroid;
  std::vector<Cuboid> cuboids;
  Cuboid arena;
  AgentParams agent;

  int state_offset(int tau) const;    // tau in [1, horizon]
  int control_offset(int tau) const;  // tau in [1, horizon]
  int binary_index(int tau, int cuboid, int face) const;

  /// Cardinality bound per (tau, cuboid) cell: 2*dim - 1.
  int cell_budget() const { return 2 * dim - 1; }

  /// Plain-text dump (objective, rows, bounds) for solver regression diffs.
  std::string debug_dump() const;
};

/// Assembles the horizon program from the current state and avoidance set.
/// Verifies at build time that big_m dominates the worst possible face
/// deficit anywhere in the arena, so a relaxed row can never bind.
MIQPInstance build_miqp(const AgentState& state, std::span<const Cuboid> avoid,
                        const MpcConfig& cfg, const AgentParams& agent,
                        const Cuboid& arena,
                        const Eigen::VectorXd& u_prev);

/// Validates a solver assignment (continuous block then binaries) against the
/// instance and converts it into a trajectory. The returned states are the
/// exact dynamics replay of the returned controls; a violated row raises
/// DecodeError naming that row.
std::pair<std::vector<AgentState>, std::vector<ControlInput>> decode(
    const MIQPInstance& instance, const Eigen::VectorXd& assignment);

/// Exact horizon objective for a trajectory/control pair.
double objective_value(std::span<const AgentState> trajectory,
                       std::span<const ControlInput> controls,
                       const Eigen::VectorXd& u_prev, const MpcConfig& cfg);

}  // namespace cogsim
