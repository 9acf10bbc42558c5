#include "cogsim/attention.hpp"

#include <cmath>

#include "cogsim/errors.hpp"

namespace cogsim {

void AttentionWeights::validate() const {
  for (const auto& row : w) {
    if (!(row[2] > 0.0) || !(row[3] > 0.0)) {
      throw ConfigError("attention w_c and w_d must be positive");
    }
    for (double v : row) {
      if (!std::isfinite(v)) {
        throw ConfigError("attention weights must be finite");
      }
    }
  }
}

Eigen::Vector3d attention_xi(double t, double hazard_distance,
                             const AttentionWeights& weights) {
  weights.validate();
  const auto& w1 = weights.w[0];
  const auto& w2 = weights.w[1];
  const auto& w3 = weights.w[2];
  Eigen::Vector3d xi;
  // exp(-inf) underflows to zero, so d = infinity lands exactly on the floor.
  xi(0) = w1[2] - w1[2] / (1.0 + w1[0] * std::exp(-w1[1] * (hazard_distance - w1[0]))) + w1[3];
  xi(1) = w2[2] - w2[2] / (1.0 + w2[0] * std::exp(-w2[1] * (t - w2[0]))) + w2[3];
  xi(2) = w3[2] / (1.0 + w3[0] * std::exp(-w3[1] * (t - w3[0]))) + w3[3];
  return xi;
}

Eigen::Vector3d sample_dirichlet(const Eigen::Vector3d& xi, RngStream& rng) {
  if (!(xi.minCoeff() > 0.0)) {
    throw InputError("dirichlet parameters must be positive");
  }
  Eigen::Vector3d draws;
  for (int a = 0; a < 3; ++a) {
    draws(a) = rng.gamma(xi(a));
  }
  const double total = draws.sum();
  if (!(total > 0.0)) {
    // All three gammas underflowed; fall back to the mean direction.
    return xi / xi.sum();
  }
  return draws / total;
}

int sample_attention(const Eigen::Vector3d& probs, RngStream& rng) {
  if (probs.minCoeff() < -1e-12 || std::abs(probs.sum() - 1.0) > 1e-9) {
    throw InputError("attention probabilities must lie on the simplex");
  }
  const double u = rng.uniform01();
  double cumulative = 0.0;
  for (int a = 0; a < 2; ++a) {
    cumulative += probs(a);
    if (u < cumulative) {
      return a;
    }
  }
  return 2;
}

void PerformanceMatrix::validate() const {
  if ((q.array() < 0.0).any() || (q.array() > 1.0).any()) {
    throw ConfigError("performance matrix entries must lie in [0,1]");
  }
}

Eigen::Vector2d psi_step(const Eigen::Vector2d& psi,
                         const PerformanceMatrix& performance,
                         const Eigen::Matrix2d& h, int attended) {
  if (attended < 0 || attended > 2) {
    throw InputError("attended attribute index out of range");
  }
  Eigen::Matrix2d b;
  b << 1.0, -1.0, -1.0, 1.0;
  const Eigen::Vector2d reinforcement = b * performance.q.col(attended);
  return h * psi + reinforcement;
}

int select_system(const Eigen::Vector2d& psi, int previous) {
  if (psi(0) > psi(1)) {
    return 1;
  }
  if (psi(1) > psi(0)) {
    return 2;
  }
  return previous;
}

}  // namespace cogsim
