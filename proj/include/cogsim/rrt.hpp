#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "cogsim/geometry.hpp"
#include "cogsim/rng.hpp"

namespace cogsim {

struct RrtConfig {
  double step_size = 15.0;                  // m
  int max_iterations = 500;                 // sampling attempts
  double goal_bias = 0.05;                  // probability of sampling the goal
  double collision_check_resolution = 1.0;  // m

  void validate() const;
};

/// Geometric path from a tree search. Waypoints are at most step_size apart
/// and none lies inside an avoidance cuboid; reached_goal marks whether the
/// final waypoint is inside the goal region.
struct ReferencePath {
  std::vector<Eigen::VectorXd> waypoints;
  bool reached_goal = false;
};

/// Index of the tree point closest to q (Euclidean); ties keep the earliest
/// insertion.
std::size_t nearest_neighbour(std::span<const Eigen::VectorXd> tree,
                              const Eigen::VectorXd& q);

/// Moves from `from` toward `toward` by at most `step`; returns `toward`
/// when it is within range, and `from` when the two coincide.
Eigen::VectorXd steer(const Eigen::VectorXd& from,
                      const Eigen::VectorXd& toward, double step);

/// Samples the segment [a,b] at spacing <= resolution (both endpoints
/// included) and reports whether every sample avoids all obstacles.
bool path_free(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
               std::span<const Cuboid> obstacles, double resolution);

/// Tree-based planner: grows a tree from start by sampling the arena
/// (goal-biased), steering from the nearest vertex, and keeping collision-free
/// extensions. Stops when an extension lands inside the goal or the iteration
/// budget runs out, in which case the branch ending nearest the goal centroid
/// is returned with reached_goal=false.
ReferencePath rrt_plan(const Eigen::VectorXd& start, const Cuboid& goal,
                       std::span<const Cuboid> obstacles, const Cuboid& arena,
                       const RrtConfig& cfg, RngStream& rng);

}  // namespace cogsim
