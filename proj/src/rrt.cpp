#include "cogsim/rrt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cogsim/errors.hpp"

namespace cogsim {

void RrtConfig::validate() const {
  if (!(step_size > 0.0)) {
    throw ConfigError("rrt step_size must be positive");
  }
  if (max_iterations <= 0) {
    throw ConfigError("rrt max_iterations must be positive");
  }
  if (!(goal_bias >= 0.0 && goal_bias < 1.0)) {
    throw ConfigError("rrt goal_bias must lie in [0,1)");
  }
  if (!(collision_check_resolution > 0.0) ||
      collision_check_resolution > step_size) {
    throw ConfigError("rrt resolution must lie in (0, step_size]");
  }
}

std::size_t nearest_neighbour(std::span<const Eigen::VectorXd> tree,
                              const Eigen::VectorXd& q) {
  if (tree.empty()) {
    throw InputError("nearest_neighbour on an empty tree");
  }
  std::size_t best = 0;
  double best_dist = (tree[0] - q).squaredNorm();
  for (std::size_t i = 1; i < tree.size(); ++i) {
    const double dist = (tree[i] - q).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = i;
    }
  }
  return best;
}

Eigen::VectorXd steer(const Eigen::VectorXd& from,
                      const Eigen::VectorXd& toward, double step) {
  if (!(step > 0.0)) {
    throw InputError("steer step must be positive");
  }
  const Eigen::VectorXd delta = toward - from;
  const double dist = delta.norm();
  if (dist <= step) {
    return toward;
  }
  return from + (step / dist) * delta;
}

bool path_free(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
               std::span<const Cuboid> obstacles, double resolution) {
  if (!(resolution > 0.0)) {
    throw InputError("path_free resolution must be positive");
  }
  const double length = (b - a).norm();
  const int segments = std::max(1, static_cast<int>(std::ceil(length / resolution)));
  for (int i = 0; i <= segments; ++i) {
    const Eigen::VectorXd p = a + (static_cast<double>(i) / segments) * (b - a);
    for (const auto& obstacle : obstacles) {
      if (obstacle.contains(p)) {
        return false;
      }
    }
  }
  return true;
}

ReferencePath rrt_plan(const Eigen::VectorXd& start, const Cuboid& goal,
                       std::span<const Cuboid> obstacles, const Cuboid& arena,
                       const RrtConfig& cfg, RngStream& rng) {
  cfg.validate();
  for (const auto& obstacle : obstacles) {
    if (obstacle.contains(start)) {
      throw InputError("rrt start lies inside an obstacle");
    }
  }
  if (goal.contains(start)) {
    return ReferencePath{{start}, true};
  }

  const Eigen::VectorXd arena_lo = arena.lower();
  const Eigen::VectorXd arena_hi = arena.upper();
  const Eigen::VectorXd goal_center = goal.centroid();
  const int dim = static_cast<int>(start.size());

  std::vector<Eigen::VectorXd> nodes{start};
  std::vector<int> parents{-1};
  int goal_node = -1;

  for (int iteration = 0; iteration < cfg.max_iterations; ++iteration) {
    Eigen::VectorXd sample(dim);
    if (rng.uniform01() < cfg.goal_bias) {
      sample = goal_center;
    } else {
      for (int k = 0; k < dim; ++k) {
        sample(k) = rng.uniform(arena_lo(k), arena_hi(k));
      }
    }
    const std::size_t nearest = nearest_neighbour(nodes, sample);
    const Eigen::VectorXd candidate = steer(nodes[nearest], sample, cfg.step_size);
    if (!path_free(nodes[nearest], candidate, obstacles,
                   cfg.collision_check_resolution)) {
      continue;
    }
    nodes.push_back(candidate);
    parents.push_back(static_cast<int>(nearest));
    if (goal.contains(candidate)) {
      goal_node = static_cast<int>(nodes.size()) - 1;
      break;
    }
  }

  // Budget exhausted: fall back to the branch ending nearest the goal.
  int leaf = goal_node;
  if (leaf < 0) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double dist = (nodes[i] - goal_center).norm();
      if (dist < best) {
        best = dist;
        leaf = static_cast<int>(i);
      }
    }
  }

  ReferencePath path;
  path.reached_goal = goal_node >= 0;
  for (int node = leaf; node >= 0; node = parents[node]) {
    path.waypoints.push_back(nodes[node]);
  }
  std::reverse(path.waypoints.begin(), path.waypoints.end());
  return path;
}

}  // namespace cogsim
