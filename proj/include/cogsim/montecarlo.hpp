#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "cogsim/mission.hpp"

namespace cogsim {

/// Per-mission randomization: the start point and the goal-region center are
/// drawn uniformly from these boxes (the goal keeps the base config's size).
struct RandomizeRanges {
  Eigen::Vector2d start_min{0.0, 0.0};
  Eigen::Vector2d start_max{200.0, 200.0};
  Eigen::Vector2d goal_center_min{850.0, 850.0};
  Eigen::Vector2d goal_center_max{950.0, 950.0};
};

struct BatchConfig {
  int runs = 200;
  MissionConfig base;
  RandomizeRanges randomize;
  std::vector<PlanMode> modes{PlanMode::cognitive, PlanMode::s1_only,
                              PlanMode::s2_only};
  std::uint64_t seed = 0;
  int jobs = 1;

  void validate() const;
};

struct ModeSummary {
  int runs = 0;
  int successes = 0;
  double success_rate = 0.0;
  double success_half_width = 0.0;      // normal approximation, 95%
  double mean_completion = 0.0;          // over successes
  double completion_half_width = 0.0;
  double mean_energy = 0.0;              // over successes
  double energy_half_width = 0.0;
};

struct BatchSummary {
  std::uint64_t seed = 0;
  int runs = 0;
  std::vector<PlanMode> modes;
  std::vector<ModeSummary> per_mode;                  // parallel to modes
  std::vector<std::vector<MissionMetrics>> metrics;   // [mode][mission]
};

const char* mode_name(PlanMode mode);

/// Runs the batch. Mission i draws its scenario and seed from
/// mix(batch seed, i); every requested mode replays the identical hazard
/// stream for that mission, so the comparison is paired. Results are
/// identical for any jobs count.
BatchSummary run_batch(const BatchConfig& cfg);

/// Ordered comparison report (success rate, completion time, energy with
/// confidence half-widths) across at least two modes.
std::string compare(const BatchSummary& summary);

struct OrderingBootstrap {
  int resamples = 0;
  // Fraction of resamples violating mean-completion s2 <= cc <= s1 and
  // mean-energy s2 <= s1 (over successes).
  double completion_violation_rate = 0.0;
  double energy_violation_rate = 0.0;
};

OrderingBootstrap bootstrap_orderings(const BatchSummary& summary,
                                      int resamples, std::uint64_t seed);

}  // namespace cogsim
