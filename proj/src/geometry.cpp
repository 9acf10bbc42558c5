#include "cogsim/geometry.hpp"

#include <cmath>
#include <limits>

#include "cogsim/errors.hpp"

namespace cogsim {

Cuboid::Cuboid(std::vector<Halfspace> faces) : faces_(std::move(faces)) {
  if (faces_.empty() || faces_.size() % 2 != 0) {
    throw ConfigError("cuboid needs 2*dim faces");
  }
  dim_ = static_cast<int>(faces_.size()) / 2;
  for (auto& face : faces_) {
    if (face.normal.size() != dim_) {
      throw ConfigError("cuboid face normal has wrong dimension");
    }
    double norm = face.normal.norm();
    if (!(norm > 0.0) || !std::isfinite(norm) || !std::isfinite(face.offset)) {
      throw ConfigError("cuboid face is degenerate");
    }
    face.normal /= norm;
    face.offset /= norm;
  }
  for (int l = 0; l < dim_; ++l) {
    const auto& a = faces_[l];
    const auto& b = faces_[l + dim_];
    if ((a.normal + b.normal).norm() > 1e-9) {
      throw ConfigError("cuboid faces l and l+dim must be antiparallel");
    }
    if (a.offset + b.offset < 0.0) {
      throw ConfigError("cuboid is empty");
    }
  }
}

Cuboid Cuboid::axis_aligned(const Eigen::VectorXd& lower,
                            const Eigen::VectorXd& upper) {
  const int dim = static_cast<int>(lower.size());
  if (upper.size() != dim || dim == 0) {
    throw ConfigError("axis_aligned bounds must have matching nonzero size");
  }
  if (((upper - lower).array() < 0.0).any()) {
    throw ConfigError("axis_aligned upper must dominate lower");
  }
  std::vector<Halfspace> faces(2 * dim);
  for (int k = 0; k < dim; ++k) {
    Eigen::VectorXd axis = Eigen::VectorXd::Zero(dim);
    axis(k) = 1.0;
    faces[k] = Halfspace{axis, upper(k)};
    faces[k + dim] = Halfspace{-axis, -lower(k)};
  }
  return Cuboid(std::move(faces));
}

Cuboid Cuboid::bounding_box(std::span<const Cuboid> boxes) {
  if (boxes.empty()) {
    throw InputError("bounding_box of nothing");
  }
  Eigen::VectorXd lo = boxes.front().lower();
  Eigen::VectorXd hi = boxes.front().upper();
  for (const auto& box : boxes.subspan(1)) {
    lo = lo.cwiseMin(box.lower());
    hi = hi.cwiseMax(box.upper());
  }
  return axis_aligned(lo, hi);
}

bool Cuboid::contains(const Eigen::VectorXd& point) const {
  for (const auto& face : faces_) {
    if (face.normal.dot(point) > face.offset) {
      return false;
    }
  }
  return true;
}

bool Cuboid::is_axis_aligned() const {
  for (const auto& face : faces_) {
    if (face.normal.cwiseAbs().maxCoeff() < 1.0 - 1e-12) {
      return false;
    }
  }
  return true;
}

Eigen::VectorXd Cuboid::lower() const {
  Eigen::VectorXd lo(dim_);
  lo.setConstant(std::numeric_limits<double>::quiet_NaN());
  for (const auto& face : faces_) {
    for (int k = 0; k < dim_; ++k) {
      if (face.normal(k) < -1.0 + 1e-12) {
        lo(k) = -face.offset;
      }
    }
  }
  if (lo.hasNaN()) {
    throw InputError("lower() requires an axis-aligned cuboid");
  }
  return lo;
}

Eigen::VectorXd Cuboid::upper() const {
  Eigen::VectorXd hi(dim_);
  hi.setConstant(std::numeric_limits<double>::quiet_NaN());
  for (const auto& face : faces_) {
    for (int k = 0; k < dim_; ++k) {
      if (face.normal(k) > 1.0 - 1e-12) {
        hi(k) = face.offset;
      }
    }
  }
  if (hi.hasNaN()) {
    throw InputError("upper() requires an axis-aligned cuboid");
  }
  return hi;
}

Eigen::VectorXd Cuboid::centroid() const { return 0.5 * (lower() + upper()); }

double Cuboid::exterior_distance(const Eigen::VectorXd& point) const {
  const Eigen::VectorXd lo = lower();
  const Eigen::VectorXd hi = upper();
  Eigen::VectorXd excess =
      (lo - point).cwiseMax(0.0).cwiseMax((point - hi).cwiseMax(0.0));
  return excess.norm();
}

Cuboid Cuboid::inflated(double margin) const {
  std::vector<Halfspace> faces = faces_;
  for (auto& face : faces) {
    face.offset += margin;
  }
  return Cuboid(std::move(faces));
}

}  // namespace cogsim
