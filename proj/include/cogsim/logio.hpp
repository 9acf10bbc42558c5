#pragma once

#include <string>

#include "cogsim/mission.hpp"
#include "cogsim/montecarlo.hpp"

namespace cogsim {

/// Header carried by every mission log so the record can be replayed without
/// the original config file.
struct MissionLogHeader {
  PlanMode mode = PlanMode::cognitive;
  std::uint64_t seed = 0;
  AgentParams agent;
  AgentState start;
};

struct MissionLog {
  MissionLogHeader header;
  MissionRecord record;
};

/// JSON-lines mission log: one header object, one object per tick, one
/// summary object. Doubles are written with 17 significant digits so the
/// round trip is value-exact.
void write_mission_log(const MissionRecord& record, const MissionConfig& cfg,
                       const std::string& path);
MissionLog read_mission_log(const std::string& path);

struct ReplayReport {
  bool ok = false;
  long steps_checked = 0;
  double max_position_gap = 0.0;
  std::string message;
};

/// Re-rolls the logged controls through the dynamics from the logged start
/// and compares against the logged states.
ReplayReport replay_mission_log(const MissionLog& log);

/// Per-tick plot data: t, xi1..xi3, attended attribute (1-based), psi1, psi2,
/// active system, position coordinates. Empty records produce a header-only
/// file.
void write_plot_csv(const MissionRecord& record, const std::string& path);

/// Batch summary as CSV, one row per mode.
void write_summary_csv(const BatchSummary& summary, const std::string& path);

/// Trajectory figure: arena, goal, final footprints, and the executed path
/// colored by the system in control.
void write_trajectory_svg(const MissionRecord& record, const MissionConfig& cfg,
                          const std::string& path);

}  // namespace cogsim
