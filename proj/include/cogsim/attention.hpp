#pragma once

#include <Eigen/Core>
#include <array>

#include "cogsim/rng.hpp"

namespace cogsim {

/// Sigmoid shape parameters for the three attribute profiles. Per attribute
/// i the tuple is (w_a, w_b, w_c, w_d): w_c and w_d set the upper span and
/// floor, w_a and w_b the response to the stimulus.
struct AttentionWeights {
  std::array<std::array<double, 4>, 3> w{{
      {40.0, 0.02, 9.0, 1.0},   // response time, driven by hazard distance
      {10.0, 0.05, 7.0, 1.0},   // mission time, decays with elapsed steps
      {10.0, 0.15, 7.0, 1.0},   // energy, grows with elapsed steps
  }};

  void validate() const;
};

/// Concentration parameters for the three attributes at step t with the
/// newest-hazard distance d (infinity when nothing emerged):
///   xi1 = w1c - w1c / (1 + w1a exp(-w1b (d - w1a))) + w1d
///   xi2 = w2c - w2c / (1 + w2a exp(-w2b (t - w2a))) + w2d
///   xi3 =       w3c / (1 + w3a exp(-w3b (t - w3a))) + w3d
Eigen::Vector3d attention_xi(double t, double hazard_distance,
                             const AttentionWeights& weights);

/// Dirichlet draw via normalized Gamma(xi_a, 1) samples.
Eigen::Vector3d sample_dirichlet(const Eigen::Vector3d& xi, RngStream& rng);

/// Categorical draw over the simplex point; returns the attended attribute
/// index in {0,1,2}.
int sample_attention(const Eigen::Vector3d& probs, RngStream& rng);

/// Fixed 2x3 scoring of each system on each attribute, entries in [0,1].
struct PerformanceMatrix {
  Eigen::Matrix<double, 2, 3> q{{0.8, 0.5, 0.3}, {0.4, 0.9, 0.9}};

  void validate() const;
};

/// One step of the decision dynamics psi' = H psi + B Q A with the fixed
/// contrast matrix B = [[1,-1],[-1,1]]; attended is the index of the one-hot
/// attention vector.
Eigen::Vector2d psi_step(const Eigen::Vector2d& psi,
                         const PerformanceMatrix& performance,
                         const Eigen::Matrix2d& h, int attended);

/// Active system from the decision score: argmax over the two components,
/// holding the previous system on an exact tie. Systems are numbered 1 and 2.
int select_system(const Eigen::Vector2d& psi, int previous);

/// Telemetry bundle for one supervisory evaluation.
struct AttentionState {
  Eigen::Vector3d xi = Eigen::Vector3d::Ones();
  Eigen::Vector3d probs = Eigen::Vector3d::Constant(1.0 / 3.0);
  int attended = 0;
};

struct DecisionState {
  Eigen::Vector2d psi = Eigen::Vector2d::Zero();
  int active = 2;
};

}  // namespace cogsim
