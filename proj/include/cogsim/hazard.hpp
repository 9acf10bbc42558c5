#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cogsim/geometry.hpp"
#include "cogsim/rng.hpp"

namespace cogsim {

/// Ground kinematics of one hazard track. Speed may go negative under the
/// Gauss-Markov noise (the track backs up along its heading); direction is
/// kept as an unwrapped angle and reduced mod 2*pi where it is consumed.
struct FirefrontKinematics {
  double speed = 0.0;      // m/s
  double direction = 0.0;  // rad
};

/// How the per-front occupancy history is condensed into the avoidance set.
enum class HistoryCompression { none, bounding_box, last_k };

struct HazardParams {
  double p_birth = 0.1;
  double p_survive = 0.75;
  double mean_speed = 3.0;          // m/s
  double mean_direction = 0.0;      // rad
  double sigma_speed = 0.8;         // m/s
  double sigma_direction = 0.0;     // rad
  double gamma = 0.8;               // memory factor in [0,1]
  double dt = 0.5;                  // s per propagation step
  Eigen::Vector2d size_range{100.0, 250.0};  // m, footprint edge lengths
  Cuboid arena;                     // birth region and position bound
  bool resample_dims_per_step = false;

  void validate() const;
};

struct Firefront {
  int id = 0;
  FirefrontKinematics kinematics;
  Eigen::VectorXd center;  // m
  Eigen::VectorXd dims;    // m, footprint edge lengths
  long born_at = 0;        // field step of genesis
  bool alive = true;
  std::vector<Cuboid> history;  // footprint per step since genesis

  /// Axis-aligned footprint centered on the current center.
  Cuboid footprint() const;
};

/// One Gauss-Markov update of speed and direction: each channel moves as
/// y' = gamma*y + (1-gamma)*mean + sqrt(1-gamma^2)*N(0, sigma^2).
FirefrontKinematics gm_step(const FirefrontKinematics& y,
                            const HazardParams& params, RngStream& rng);

/// Bernoulli track transition: an absent track births with p_birth (uniform
/// center in the arena, edges uniform in size_range, kinematics at the
/// stationary law); a present track survives with p_survive and then follows
/// gm_step plus an Euler move of dt*speed along its heading.
std::optional<Firefront> transition(const std::optional<Firefront>& front,
                                    const HazardParams& params, RngStream& rng,
                                    long t, int id_for_birth);

/// The evolving set of hazard tracks. Dead fronts are retained (alive=false)
/// so logs can show dissipation, but they drop out of every query.
class HazardField {
 public:
  /// One field step: survival + kinematics + move for each alive front in id
  /// order, then a single genesis draw. Draw order is fixed so identical
  /// seeds give identical evolutions.
  void advance(const HazardParams& params, RngStream& rng);

  long time() const { return t_; }
  const std::vector<Firefront>& fronts() const { return fronts_; }
  int alive_count() const;

  /// Avoidance set over alive fronts after history compression.
  std::vector<Cuboid> occupied_history(HistoryCompression policy,
                                       int last_k = 1) const;

  /// Distance from p to the nearest alive front born at field step t;
  /// +infinity when none was.
  double distance_to_newest(const Eigen::VectorXd& p, long t) const;

  /// Distance from p to the nearest alive front center; +infinity when empty.
  double min_center_distance(const Eigen::VectorXd& p) const;

  /// True when p lies inside any alive footprint.
  bool covers(const Eigen::VectorXd& p) const;

 private:
  std::vector<Firefront> fronts_;
  long t_ = 0;
  int next_id_ = 0;
};

}  // namespace cogsim
