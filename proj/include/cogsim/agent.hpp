#pragma once

#include <Eigen/Core>
#include <span>
#include <utility>
#include <vector>

namespace cogsim {

/// Double-integrator-with-drag parameters. The state transition pair is
///   Phi   = [[I, dt*I], [0, (1-drag)*I]]
///   Gamma = [[0], [(dt/mass)*I]]
/// so position integrates velocity and velocity decays by (1-drag) per step
/// while force enters scaled by dt/mass.
struct AgentParams {
  double dt = 1.0;      // s
  double drag = 0.2;    // dimensionless, in [0,1)
  double mass = 1.05;   // kg
  int dim = 2;          // 2 or 3
  double v_max = 15.0;  // m/s, per axis
  double u_max = 7.5;   // N, per axis

  void validate() const;
};

struct AgentState {
  Eigen::VectorXd position;  // m
  Eigen::VectorXd velocity;  // m/s

  static AgentState zero(int dim);

  /// [position; velocity] as one 2*dim vector.
  Eigen::VectorXd stacked() const;
  static AgentState from_stacked(const Eigen::VectorXd& x);
};

struct ControlInput {
  Eigen::VectorXd force;  // N
};

/// (Phi, Gamma) for the given parameters. Phi is 2dim x 2dim, Gamma 2dim x dim.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_matrices(
    const AgentParams& params);

/// Per-axis saturation to [-u_max, u_max].
Eigen::VectorXd clamp_force(const Eigen::VectorXd& force,
                            const AgentParams& params);

/// One exact step x' = Phi x + Gamma u. Rejects out-of-bounds force; callers
/// that want saturation clamp first.
AgentState step(const AgentState& state, const ControlInput& input,
                const AgentParams& params);

/// Repeated step application; element tau is the state after tau+1 controls.
std::vector<AgentState> rollout(const AgentState& state,
                                std::span<const ControlInput> controls,
                                const AgentParams& params);

}  // namespace cogsim
