#include "cogsim/hazard.hpp"

#include <cmath>
#include <limits>

#include "cogsim/errors.hpp"

namespace cogsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd heading_vector(const FirefrontKinematics& kin, int dim) {
  // Motion stays in the ground plane; a 3D field keeps its z fixed.
  Eigen::VectorXd dir = Eigen::VectorXd::Zero(dim);
  dir(0) = std::cos(kin.direction);
  dir(1) = std::sin(kin.direction);
  return dir;
}

Eigen::VectorXd draw_dims(const HazardParams& params, RngStream& rng, int dim) {
  Eigen::VectorXd dims(dim);
  for (int k = 0; k < dim; ++k) {
    dims(k) = rng.uniform(params.size_range(0), params.size_range(1));
  }
  return dims;
}

}  // namespace

void HazardParams::validate() const {
  if (!(p_birth >= 0.0 && p_birth <= 1.0) ||
      !(p_survive >= 0.0 && p_survive <= 1.0)) {
    throw ConfigError("hazard probabilities must lie in [0,1]");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw ConfigError("hazard gamma must lie in [0,1]");
  }
  if (!(sigma_speed >= 0.0) || !(sigma_direction >= 0.0)) {
    throw ConfigError("hazard sigmas must be non-negative");
  }
  if (!(dt > 0.0)) {
    throw ConfigError("hazard dt must be positive");
  }
  if (!(size_range(0) > 0.0) || !(size_range(1) >= size_range(0))) {
    throw ConfigError("hazard size_range must satisfy 0 < min <= max");
  }
  if (arena.dim() < 2) {
    throw ConfigError("hazard arena must be at least 2-dimensional");
  }
}

Cuboid Firefront::footprint() const {
  return Cuboid::axis_aligned(center - 0.5 * dims, center + 0.5 * dims);
}

FirefrontKinematics gm_step(const FirefrontKinematics& y,
                            const HazardParams& params, RngStream& rng) {
  const double g = params.gamma;
  const double noise_scale = std::sqrt(std::max(0.0, 1.0 - g * g));
  FirefrontKinematics next;
  next.speed = g * y.speed + (1.0 - g) * params.mean_speed +
               noise_scale * rng.normal(0.0, params.sigma_speed);
  next.direction = g * y.direction + (1.0 - g) * params.mean_direction +
                   noise_scale * rng.normal(0.0, params.sigma_direction);
  return next;
}

std::optional<Firefront> transition(const std::optional<Firefront>& front,
                                    const HazardParams& params, RngStream& rng,
                                    long t, int id_for_birth) {
  params.validate();
  if (!front.has_value()) {
    if (rng.uniform01() >= params.p_birth) {
      return std::nullopt;
    }
    const int dim = params.arena.dim();
    const Eigen::VectorXd lo = params.arena.lower();
    const Eigen::VectorXd hi = params.arena.upper();
    Firefront born;
    born.id = id_for_birth;
    born.center.resize(dim);
    for (int k = 0; k < dim; ++k) {
      born.center(k) = rng.uniform(lo(k), hi(k));
    }
    born.dims = draw_dims(params, rng, dim);
    // Genesis kinematics at the stationary law of the Gauss-Markov chain.
    born.kinematics.speed = rng.normal(params.mean_speed, params.sigma_speed);
    born.kinematics.direction =
        rng.normal(params.mean_direction, params.sigma_direction);
    born.born_at = t;
    born.alive = true;
    born.history.push_back(born.footprint());
    return born;
  }
  if (rng.uniform01() >= params.p_survive) {
    return std::nullopt;
  }
  Firefront next = *front;
  next.kinematics = gm_step(front->kinematics, params, rng);
  next.center += params.dt * next.kinematics.speed *
                 heading_vector(next.kinematics, static_cast<int>(next.center.size()));
  if (params.resample_dims_per_step) {
    next.dims = draw_dims(params, rng, static_cast<int>(next.center.size()));
  }
  next.history.push_back(next.footprint());
  return next;
}

void HazardField::advance(const HazardParams& params, RngStream& rng) {
  params.validate();
  ++t_;
  for (auto& front : fronts_) {
    if (!front.alive) {
      continue;
    }
    std::optional<Firefront> survived =
        transition(std::optional<Firefront>(front), params, rng, t_, -1);
    if (survived.has_value()) {
      front = std::move(*survived);
    } else {
      front.alive = false;
    }
  }
  std::optional<Firefront> born =
      transition(std::nullopt, params, rng, t_, next_id_);
  if (born.has_value()) {
    ++next_id_;
    fronts_.push_back(std::move(*born));
  }
}

int HazardField::alive_count() const {
  int n = 0;
  for (const auto& front : fronts_) {
    n += front.alive ? 1 : 0;
  }
  return n;
}

std::vector<Cuboid> HazardField::occupied_history(HistoryCompression policy,
                                                  int last_k) const {
  std::vector<Cuboid> occupied;
  for (const auto& front : fronts_) {
    if (!front.alive || front.history.empty()) {
      continue;
    }
    switch (policy) {
      case HistoryCompression::none:
        occupied.insert(occupied.end(), front.history.begin(),
                        front.history.end());
        break;
      case HistoryCompression::bounding_box:
        occupied.push_back(Cuboid::bounding_box(front.history));
        break;
      case HistoryCompression::last_k: {
        if (last_k < 1) {
          throw InputError("last_k compression needs k >= 1");
        }
        const std::size_t k =
            std::min(front.history.size(), static_cast<std::size_t>(last_k));
        occupied.insert(occupied.end(), front.history.end() - k,
                        front.history.end());
        break;
      }
    }
  }
  return occupied;
}

double HazardField::distance_to_newest(const Eigen::VectorXd& p, long t) const {
  double best = kInf;
  for (const auto& front : fronts_) {
    if (front.alive && front.born_at == t) {
      best = std::min(best, (p - front.center).norm());
    }
  }
  return best;
}

double HazardField::min_center_distance(const Eigen::VectorXd& p) const {
  double best = kInf;
  for (const auto& front : fronts_) {
    if (front.alive) {
      best = std::min(best, (p - front.center).norm());
    }
  }
  return best;
}

bool HazardField::covers(const Eigen::VectorXd& p) const {
  for (const auto& front : fronts_) {
    if (front.alive && front.footprint().contains(p)) {
      return true;
    }
  }
  return false;
}

}  // namespace cogsim
