#include "cogsim/agent.hpp"

#include <cmath>

#include "cogsim/errors.hpp"

namespace cogsim {

void AgentParams::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ConfigError("agent dt must be positive");
  }
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw ConfigError("agent mass must be positive");
  }
  if (!(drag >= 0.0 && drag < 1.0)) {
    throw ConfigError("agent drag must lie in [0,1)");
  }
  if (dim != 2 && dim != 3) {
    throw ConfigError("agent dim must be 2 or 3");
  }
  if (!(v_max > 0.0) || !(u_max > 0.0)) {
    throw ConfigError("agent v_max and u_max must be positive");
  }
}

AgentState AgentState::zero(int dim) {
  return AgentState{Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Zero(dim)};
}

Eigen::VectorXd AgentState::stacked() const {
  Eigen::VectorXd x(position.size() + velocity.size());
  x << position, velocity;
  return x;
}

AgentState AgentState::from_stacked(const Eigen::VectorXd& x) {
  const int dim = static_cast<int>(x.size()) / 2;
  return AgentState{x.head(dim), x.tail(dim)};
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_matrices(
    const AgentParams& params) {
  params.validate();
  const int d = params.dim;
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  phi.topLeftCorner(d, d) = eye;
  phi.topRightCorner(d, d) = params.dt * eye;
  phi.bottomRightCorner(d, d) = (1.0 - params.drag) * eye;
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(2 * d, d);
  gamma.bottomRows(d) = (params.dt / params.mass) * eye;
  return {phi, gamma};
}

Eigen::VectorXd clamp_force(const Eigen::VectorXd& force,
                            const AgentParams& params) {
  return force.cwiseMax(-params.u_max).cwiseMin(params.u_max);
}

AgentState step(const AgentState& state, const ControlInput& input,
                const AgentParams& params) {
  params.validate();
  if (state.position.size() != params.dim ||
      state.velocity.size() != params.dim ||
      input.force.size() != params.dim) {
    throw InputError("state/input dimension mismatch");
  }
  if (input.force.cwiseAbs().maxCoeff() > params.u_max + 1e-12) {
    throw InputError("control force exceeds u_max; clamp before stepping");
  }
  AgentState next;
  next.position = state.position + params.dt * state.velocity;
  next.velocity =
      (1.0 - params.drag) * state.velocity + (params.dt / params.mass) * input.force;
  return next;
}

std::vector<AgentState> rollout(const AgentState& state,
                                std::span<const ControlInput> controls,
                                const AgentParams& params) {
  std::vector<AgentState> trajectory;
  trajectory.reserve(controls.size());
  AgentState current = state;
  for (const auto& u : controls) {
    current = step(current, u, params);
    trajectory.push_back(current);
  }
  return trajectory;
}

}  // namespace cogsim
