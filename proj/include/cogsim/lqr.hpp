#pragma once

#include <Eigen/Core>
#include <vector>

#include "cogsim/agent.hpp"
#include "cogsim/rrt.hpp"

namespace cogsim {

struct LqrConfig {
  Eigen::MatrixXd q_weight;  // state deviation cost, symmetric PSD
  Eigen::MatrixXd r_weight;  // input cost, symmetric PD
  double riccati_tolerance = 1e-12;
  int riccati_max_iter = 100000;

  /// Scalar weights expanded to q*I(2dim) and r*I(dim).
  static LqrConfig diagonal(double q, double r, int dim);

  void validate() const;
};

/// Infinite-horizon discrete LQR gain: the Riccati recursion
/// P <- Q + Phi' (P - P Gamma (R + Gamma' P Gamma)^-1 Gamma' P) Phi is
/// iterated to tolerance and K = (R + Gamma' P Gamma)^-1 Gamma' P Phi is
/// returned. Results are cached per (Phi, Gamma, Q, R).
Eigen::MatrixXd lqr_gain(const Eigen::MatrixXd& phi,
                         const Eigen::MatrixXd& gamma, const LqrConfig& cfg);

/// Riccati fixed point itself, for analysis and tests.
Eigen::MatrixXd riccati_solution(const Eigen::MatrixXd& phi,
                                 const Eigen::MatrixXd& gamma,
                                 const LqrConfig& cfg);

struct TrackResult {
  std::vector<AgentState> trajectory;
  std::vector<ControlInput> controls;
};

/// Lifts a waypoint path to reference states (forward-difference velocities,
/// terminal velocity zero) and follows it with the clamped feedback law
/// u = clamp(-K (x - x_ref)). The returned trajectory is the exact rollout of
/// the returned controls; its length equals the path length.
TrackResult track(const ReferencePath& path, const AgentState& state,
                  const AgentParams& params, const LqrConfig& cfg);

}  // namespace cogsim
