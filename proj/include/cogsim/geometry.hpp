#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

namespace cogsim {

/// One face of a convex region: points p with dot(normal, p) <= offset.
struct Halfspace {
  Eigen::VectorXd normal;  // outward, unit length
  double offset = 0.0;     // m
};

/// Convex box-like region stored as 2*dim halfspaces. Faces come in
/// antiparallel pairs (l and l + dim share an axis), which keeps the region
/// bounded and lets axis-aligned boxes expose interval queries.
class Cuboid {
 public:
  Cuboid() = default;
  explicit Cuboid(std::vector<Halfspace> faces);

  static Cuboid axis_aligned(const Eigen::VectorXd& lower,
                             const Eigen::VectorXd& upper);

  /// Axis-aligned box enclosing all the given (axis-aligned) cuboids.
  static Cuboid bounding_box(std::span<const Cuboid> boxes);

  int dim() const { return dim_; }
  const std::vector<Halfspace>& faces() const { return faces_; }

  /// Closed-region membership: true on the boundary.
  bool contains(const Eigen::VectorXd& point) const;

  bool is_axis_aligned() const;
  Eigen::VectorXd lower() const;
  Eigen::VectorXd upper() const;
  Eigen::VectorXd centroid() const;

  /// Euclidean distance from point to the region; 0 inside or on it.
  double exterior_distance(const Eigen::VectorXd& point) const;

  /// Region grown outward by margin on every face.
  Cuboid inflated(double margin) const;

 private:
  std::vector<Halfspace> faces_;
  int dim_ = 0;
};

}  // namespace cogsim
