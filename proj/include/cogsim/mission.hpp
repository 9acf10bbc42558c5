#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

#include "cogsim/agent.hpp"
#include "cogsim/attention.hpp"
#include "cogsim/bnb.hpp"
#include "cogsim/geometry.hpp"
#include "cogsim/hazard.hpp"
#include "cogsim/lqr.hpp"
#include "cogsim/mpc.hpp"
#include "cogsim/rrt.hpp"

namespace cogsim {

enum class PlanMode { cognitive, s1_only, s2_only };
enum class Outcome { success, failure_trapped, timeout };

/// What counts as being trapped while the agent idles through hazard
/// propagation: proximity to a front center, being caught inside a footprint,
/// or either of the two.
enum class TrapCheck { center, footprint, both };

enum class ResponseTimeMode { synthetic, measured };

struct MissionConfig {
  AgentParams agent;
  HazardParams hazard;  // hazard.dt is the propagation period T_f
  RrtConfig rrt;
  LqrConfig lqr;

  int mpc_horizon = 80;
  double big_m = 1e5;
  double strict_margin = 0.5;  // m
  Eigen::Vector2d kappa_mission{1.0, 0.001};  // weights when time is attended
  Eigen::Vector2d kappa_energy{0.001, 1.0};   // weights when energy is attended
  // Big-M relaxations bound weakly, so closing the gap can take huge trees;
  // the mission loop runs the solver as an anytime method under a node
  // budget and uses the best incumbent.
  BnbBudget budget{1e-4, 60, 0.0};

  AttentionWeights weights;
  PerformanceMatrix q_matrix;
  Eigen::Matrix2d h_matrix = 0.5 * Eigen::Matrix2d::Identity();

  Cuboid arena;
  Cuboid goal;
  AgentState start;

  long max_steps = 200;
  double d_safe = 20.0;  // m
  ResponseTimeMode response_mode = ResponseTimeMode::synthetic;
  double synthetic_s1 = 0.155;  // s
  double synthetic_s2 = 5.0;    // s
  int replan_interval = 1;      // ticks between scheduled replans
  double obstacle_margin = 5.0; // m, planner-side inflation of footprints
  TrapCheck trap_check = TrapCheck::both;
  HistoryCompression compression = HistoryCompression::bounding_box;
  int last_k = 5;

  void validate() const;

  /// The reference 2D evaluation setup: 1 km x 1 km arena, start (50,50),
  /// 100 m goal square at (900,900), and the standard parameter values.
  static MissionConfig reference();
};

struct FrontSnapshot {
  int id = 0;
  double speed = 0.0;
  double direction = 0.0;
  Eigen::VectorXd center;
  Eigen::VectorXd dims;
  long born_at = 0;
  bool alive = true;
};

/// One closed-loop tick of telemetry. `state` is the post-control state and
/// `fronts` the field after this tick's propagations, so row k pairs the
/// executed position with the hazards it actually faced.
struct StepTelemetry {
  long t = 0;
  int active = 2;  // system in control
  Eigen::Vector3d xi = Eigen::Vector3d::Ones();
  Eigen::Vector3d probs = Eigen::Vector3d::Constant(1.0 / 3.0);
  int attended = 0;  // 0-based attribute index
  Eigen::Vector2d psi = Eigen::Vector2d::Zero();
  double hazard_distance = 0.0;  // d_t fed to the attention profiles
  AgentState state;
  Eigen::VectorXd control;
  bool control_applied = false;
  double response_time = 0.0;  // s, when a plan was generated this tick
  int propagations = 0;
  long plan_id = -1;  // tick of the plan in use, -1 when hovering
  bool replanned = false;
  long field_time = 0;
  std::vector<FrontSnapshot> fronts;
};

struct MissionRecord {
  PlanMode mode = PlanMode::cognitive;
  std::uint64_t seed = 0;
  std::vector<StepTelemetry> steps;
  Outcome outcome = Outcome::timeout;
  long completion_time = 0;  // applied controls until goal entry
  double energy = 0.0;       // sum of squared jumps between applied controls
  long switches = 0;
};

struct MissionMetrics {
  bool success = false;
  long completion_time = 0;
  double energy = 0.0;
  long switches = 0;
};

/// Closed-loop driver. Each tick runs the supervisory evaluation, replans
/// with the active system when due, propagates the hazard field
/// ceil(T_s / T_f) times while the agent idles (checking the trap condition
/// after each propagation), applies the plan's next control, and tests goal
/// membership. All randomness comes from three streams derived from the
/// mission seed ("hazard", "planner", "attention"), so hazard evolution is
/// identical across modes.
class MissionEngine {
 public:
  MissionEngine(const MissionConfig& cfg, std::uint64_t seed, PlanMode mode);

  bool finished() const { return outcome_.has_value(); }
  Outcome outcome() const;
  long current_tick() const { return t_; }
  const HazardField& field() const { return field_; }
  const AgentState& state() const { return state_; }

  /// Runs one tick; no-op once finished.
  void tick();

  /// Ticks to termination and returns the record.
  MissionRecord run();

 private:
  struct PlanOutcome {
    std::vector<Eigen::VectorXd> controls;
    double response_time = 0.0;
  };

  double newest_hazard_distance() const;
  std::vector<Cuboid> planner_obstacles(double margin) const;
  PlanOutcome plan_system1();
  PlanOutcome plan_system2(int attended);
  bool trapped() const;
  Eigen::VectorXd shifted_warm_start(const MIQPInstance& inst) const;
  void snapshot_fronts(StepTelemetry& row) const;

  MissionConfig cfg_;
  PlanMode mode_;
  std::uint64_t seed_;
  RngStream hazard_rng_;
  RngStream planner_rng_;
  RngStream attention_rng_;

  HazardField field_;
  AgentState state_;
  Eigen::VectorXd last_applied_;  // feeds the smoothness reference
  bool any_applied_ = false;

  DecisionState decision_;
  int active_prev_ = 2;

  std::vector<Eigen::VectorXd> plan_;
  std::size_t plan_cursor_ = 0;
  long plan_tick_ = -1;

  std::optional<Eigen::VectorXd> last_s2_controls_;  // stacked horizon controls

  long t_ = 0;
  long window_lo_ = 0;  // field times (lo, hi] of the previous tick's
  long window_hi_ = 0;  // propagations, the d_t scope
  int births_in_window_ = 0;

  std::optional<Outcome> outcome_;
  MissionRecord record_;
};

MissionRecord run_mission(const MissionConfig& cfg, std::uint64_t seed,
                          PlanMode mode);

MissionMetrics metrics(const MissionRecord& record);

}  // namespace cogsim
