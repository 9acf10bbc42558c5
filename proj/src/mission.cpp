#include "cogsim/mission.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include "cogsim/errors.hpp"

namespace cogsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

void MissionConfig::validate() const {
  agent.validate();
  hazard.validate();
  rrt.validate();
  lqr.validate();
  weights.validate();
  q_matrix.validate();
  if (mpc_horizon < 1) {
    throw ConfigError("mission mpc_horizon must be at least 1");
  }
  if (!(big_m > 0.0) || !(strict_margin > 0.0)) {
    throw ConfigError("mission big_m and strict_margin must be positive");
  }
  if ((kappa_mission.array() < 0.0).any() || (kappa_energy.array() < 0.0).any()) {
    throw ConfigError("mission kappa weights must be non-negative");
  }
  if (max_steps < 1) {
    throw ConfigError("mission max_steps must be at least 1");
  }
  if (!(d_safe > 0.0)) {
    throw ConfigError("mission d_safe must be positive");
  }
  if (replan_interval < 1) {
    throw ConfigError("mission replan_interval must be at least 1");
  }
  if (obstacle_margin < 0.0) {
    throw ConfigError("mission obstacle_margin must be non-negative");
  }
  if (arena.dim() != agent.dim || goal.dim() != agent.dim) {
    throw ConfigError("mission arena/goal dimension mismatch");
  }
  if (start.position.size() != agent.dim ||
      start.velocity.size() != agent.dim) {
    throw ConfigError("mission start state dimension mismatch");
  }
}

MissionConfig MissionConfig::reference() {
  MissionConfig cfg;
  cfg.agent = AgentParams{};  // dt=1, drag=0.2, mass=1.05, dim=2, 15 m/s, 7.5 N
  cfg.arena = Cuboid::axis_aligned(Eigen::Vector2d(0.0, 0.0),
                                   Eigen::Vector2d(1000.0, 1000.0));
  cfg.goal = Cuboid::axis_aligned(Eigen::Vector2d(850.0, 850.0),
                                  Eigen::Vector2d(950.0, 950.0));
  cfg.start.position = Eigen::Vector2d(50.0, 50.0);
  cfg.start.velocity = Eigen::Vector2d(0.0, 0.0);

  cfg.hazard.p_birth = 0.1;
  cfg.hazard.p_survive = 0.75;
  cfg.hazard.mean_speed = 3.0;
  cfg.hazard.mean_direction = std::numbers::pi / 4.0;
  cfg.hazard.sigma_speed = 0.8;
  cfg.hazard.sigma_direction = std::numbers::pi / 20.0;
  cfg.hazard.gamma = 0.8;
  cfg.hazard.dt = 0.5;
  cfg.hazard.size_range = Eigen::Vector2d(100.0, 250.0);
  cfg.hazard.arena = cfg.arena;

  cfg.rrt = RrtConfig{};  // 15 m step, 500 iterations
  cfg.lqr = LqrConfig::diagonal(2.0, 0.1, cfg.agent.dim);
  return cfg;
}

MissionEngine::MissionEngine(const MissionConfig& cfg, std::uint64_t seed,
                             PlanMode mode)
    : cfg_(cfg),
      mode_(mode),
      seed_(seed),
      hazard_rng_(RngStream::derive(seed, "hazard")),
      planner_rng_(RngStream::derive(seed, "planner")),
      attention_rng_(RngStream::derive(seed, "attention")) {
  cfg_.validate();
  state_ = cfg.start;
  last_applied_ = Eigen::VectorXd::Zero(cfg.agent.dim);
  record_.mode = mode;
  record_.seed = seed;
  if (cfg_.goal.contains(state_.position)) {
    outcome_ = Outcome::success;
    record_.outcome = Outcome::success;
    record_.completion_time = 0;
  }
}

Outcome MissionEngine::outcome() const {
  if (!outcome_.has_value()) {
    throw InputError("mission has not terminated");
  }
  return *outcome_;
}

double MissionEngine::newest_hazard_distance() const {
  double best = kInf;
  for (long t = window_lo_ + 1; t <= window_hi_; ++t) {
    best = std::min(best, field_.distance_to_newest(state_.position, t));
  }
  return best;
}

std::vector<Cuboid> MissionEngine::planner_obstacles(double margin) const {
  std::vector<Cuboid> obstacles =
      field_.occupied_history(cfg_.compression, cfg_.last_k);
  if (margin > 0.0) {
    for (auto& cuboid : obstacles) {
      cuboid = cuboid.inflated(margin);
    }
  }
  return obstacles;
}

MissionEngine::PlanOutcome MissionEngine::plan_system1() {
  const auto begin = std::chrono::steady_clock::now();
  PlanOutcome out;
  ReferencePath path;
  bool planned = false;
  for (double margin : {cfg_.obstacle_margin, 0.0}) {
    try {
      path = rrt_plan(state_.position, cfg_.goal, planner_obstacles(margin),
                      cfg_.arena, cfg_.rrt, planner_rng_);
      planned = true;
      break;
    } catch (const InputError&) {
      // Start sits inside an inflated footprint; retry tighter, else hover.
    }
  }
  if (planned && !path.waypoints.empty()) {
    TrackResult tracked = track(path, state_, cfg_.agent, cfg_.lqr);
    out.controls.reserve(tracked.controls.size());
    for (const auto& u : tracked.controls) {
      out.controls.push_back(u.force);
    }
  }
  if (cfg_.response_mode == ResponseTimeMode::synthetic) {
    out.response_time = cfg_.synthetic_s1;
  } else {
    out.response_time = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - begin)
                            .count();
  }
  return out;
}

Eigen::VectorXd MissionEngine::shifted_warm_start(
    const MIQPInstance& inst) const {
  // Previous horizon controls shifted by one step, last control repeated;
  // states replayed exactly and binaries implied by the face deficits.
  const int d = inst.dim;
  Eigen::VectorXd controls(d * inst.horizon);
  const Eigen::VectorXd& prev = *last_s2_controls_;
  const int prev_len = static_cast<int>(prev.size()) / d;
  for (int tau = 0; tau < inst.horizon; ++tau) {
    const int src = std::min(tau + 1, prev_len - 1);
    controls.segment(tau * d, d) = prev.segment(src * d, d);
  }
  Eigen::VectorXd z(inst.num_continuous + inst.num_binary);
  Eigen::VectorXd x = inst.x0;
  for (int tau = 1; tau <= inst.horizon; ++tau) {
    const Eigen::VectorXd u = controls.segment((tau - 1) * d, d);
    x = inst.phi * x + inst.gamma * u;
    z.segment(inst.state_offset(tau), 2 * d) = x;
    z.segment(inst.control_offset(tau), d) = u;
    for (int i = 0; i < inst.num_cuboids; ++i) {
      const auto& faces = inst.cuboids[i].faces();
      for (int l = 0; l < 2 * d; ++l) {
        const double deficit =
            faces[l].offset + inst.margin - faces[l].normal.dot(x.head(d));
        z(inst.num_continuous + inst.binary_index(tau, i, l)) =
            deficit > 1e-9 ? 1.0 : 0.0;
      }
    }
  }
  return z;
}

MissionEngine::PlanOutcome MissionEngine::plan_system2(int attended) {
  const auto begin = std::chrono::steady_clock::now();
  PlanOutcome out;

  MpcConfig mpc;
  mpc.horizon = cfg_.mpc_horizon;
  const Eigen::Vector2d kappa =
      attended == 2 ? cfg_.kappa_energy : cfg_.kappa_mission;
  mpc.kappa_goal = kappa(0);
  mpc.kappa_smooth = kappa(1);
  mpc.big_m = cfg_.big_m;
  mpc.strict_margin = cfg_.strict_margin;
  mpc.goal_centroid = cfg_.goal.centroid();

  for (double margin : {cfg_.obstacle_margin, 0.0}) {
    const std::vector<Cuboid> obstacles = planner_obstacles(margin);
    const MIQPInstance inst = build_miqp(state_, obstacles, mpc, cfg_.agent,
                                         cfg_.arena, last_applied_);
    Eigen::VectorXd warm;
    const Eigen::VectorXd* warm_ptr = nullptr;
    if (last_s2_controls_.has_value()) {
      warm = shifted_warm_start(inst);
      warm_ptr = &warm;
    }
    BnbResult solved = branch_and_bound(inst, cfg_.budget, warm_ptr);
    if (solved.has_incumbent) {
      auto [trajectory, controls] = decode(inst, solved.incumbent);
      out.controls.reserve(controls.size());
      Eigen::VectorXd stacked(static_cast<int>(controls.size()) * inst.dim);
      for (std::size_t i = 0; i < controls.size(); ++i) {
        out.controls.push_back(controls[i].force);
        stacked.segment(static_cast<int>(i) * inst.dim, inst.dim) =
            controls[i].force;
      }
      last_s2_controls_ = stacked;
      break;
    }
  }
  if (cfg_.response_mode == ResponseTimeMode::synthetic) {
    out.response_time = cfg_.synthetic_s2;
  } else {
    out.response_time = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - begin)
                            .count();
  }
  return out;
}

bool MissionEngine::trapped() const {
  if (cfg_.trap_check == TrapCheck::center ||
      cfg_.trap_check == TrapCheck::both) {
    if (field_.min_center_distance(state_.position) < cfg_.d_safe) {
      return true;
    }
  }
  if (cfg_.trap_check == TrapCheck::footprint ||
      cfg_.trap_check == TrapCheck::both) {
    if (field_.covers(state_.position)) {
      return true;
    }
  }
  return false;
}

void MissionEngine::snapshot_fronts(StepTelemetry& row) const {
  row.field_time = field_.time();
  row.fronts.clear();
  for (const auto& front : field_.fronts()) {
    if (!front.alive) {
      continue;
    }
    FrontSnapshot snap;
    snap.id = front.id;
    snap.speed = front.kinematics.speed;
    snap.direction = front.kinematics.direction;
    snap.center = front.center;
    snap.dims = front.dims;
    snap.born_at = front.born_at;
    snap.alive = front.alive;
    row.fronts.push_back(std::move(snap));
  }
}

void MissionEngine::tick() {
  if (finished()) {
    return;
  }

  StepTelemetry row;
  row.t = t_;

  // Supervisory evaluation. Forced modes still run the pipeline (the streams
  // are independent, so this never perturbs the hazards) but override the
  // selection.
  const double d_t = newest_hazard_distance();
  row.hazard_distance = d_t;
  row.xi = attention_xi(static_cast<double>(t_), d_t, cfg_.weights);
  row.probs = sample_dirichlet(row.xi, attention_rng_);
  row.attended = sample_attention(row.probs, attention_rng_);
  decision_.psi = psi_step(decision_.psi, cfg_.q_matrix, cfg_.h_matrix,
                           row.attended);
  decision_.active = select_system(decision_.psi, decision_.active);
  row.psi = decision_.psi;
  int active = decision_.active;
  if (mode_ == PlanMode::s1_only) {
    active = 1;
  } else if (mode_ == PlanMode::s2_only) {
    active = 2;
  }
  row.active = active;

  // Replan when the plan ran out, the schedule says so, control switched
  // hands, or a front emerged since the last plan.
  const bool plan_exhausted = plan_cursor_ >= plan_.size();
  const bool scheduled = plan_tick_ < 0 || (t_ - plan_tick_) >= cfg_.replan_interval;
  const bool switched = active != active_prev_;
  const bool new_front = births_in_window_ > 0;
  int propagations = 0;
  if (plan_exhausted || scheduled || switched || new_front) {
    PlanOutcome planned =
        active == 1 ? plan_system1() : plan_system2(row.attended);
    plan_ = std::move(planned.controls);
    plan_cursor_ = 0;
    plan_tick_ = t_;
    row.replanned = true;
    row.response_time = planned.response_time;
    propagations = static_cast<int>(
        std::ceil(planned.response_time / cfg_.hazard.dt));
  }
  row.plan_id = plan_.empty() ? -1 : plan_tick_;
  row.propagations = propagations;
  active_prev_ = active;

  // Hazards evolve while the agent idles on the new plan; each propagation
  // can trap the agent where it stands.
  const long window_start = field_.time();
  births_in_window_ = 0;
  bool now_trapped = false;
  for (int p = 0; p < propagations && !now_trapped; ++p) {
    const std::size_t fronts_before = field_.fronts().size();
    field_.advance(cfg_.hazard, hazard_rng_);
    births_in_window_ +=
        static_cast<int>(field_.fronts().size() - fronts_before);
    now_trapped = trapped();
  }
  window_lo_ = window_start;
  window_hi_ = field_.time();

  if (now_trapped) {
    row.state = state_;
    row.control = Eigen::VectorXd::Zero(cfg_.agent.dim);
    row.control_applied = false;
    snapshot_fronts(row);
    record_.steps.push_back(std::move(row));
    outcome_ = Outcome::failure_trapped;
    record_.outcome = Outcome::failure_trapped;
    record_.completion_time = t_ + 1;
    return;
  }

  // Apply the plan's next control; an empty plan means hover in place.
  Eigen::VectorXd u = Eigen::VectorXd::Zero(cfg_.agent.dim);
  if (plan_cursor_ < plan_.size()) {
    u = plan_[plan_cursor_++];
  }
  state_ = step(state_, ControlInput{u}, cfg_.agent);
  if (any_applied_) {
    record_.energy += (u - last_applied_).squaredNorm();
  }
  last_applied_ = u;
  any_applied_ = true;

  row.state = state_;
  row.control = u;
  row.control_applied = true;
  snapshot_fronts(row);

  if (t_ > 0 && !record_.steps.empty() &&
      record_.steps.back().active != active) {
    ++record_.switches;
  }
  record_.steps.push_back(std::move(row));

  // A footprint that swept or spawned over the executed position traps the
  // agent as well.
  if ((cfg_.trap_check == TrapCheck::footprint ||
       cfg_.trap_check == TrapCheck::both) &&
      field_.covers(state_.position)) {
    outcome_ = Outcome::failure_trapped;
    record_.outcome = Outcome::failure_trapped;
    record_.completion_time = t_ + 1;
    return;
  }

  if (cfg_.goal.contains(state_.position)) {
    outcome_ = Outcome::success;
    record_.outcome = Outcome::success;
    record_.completion_time = t_ + 1;
    return;
  }

  ++t_;
  if (t_ >= cfg_.max_steps) {
    outcome_ = Outcome::timeout;
    record_.outcome = Outcome::timeout;
    record_.completion_time = t_;
  }
}

MissionRecord MissionEngine::run() {
  while (!finished()) {
    tick();
  }
  return record_;
}

MissionRecord run_mission(const MissionConfig& cfg, std::uint64_t seed,
                          PlanMode mode) {
  MissionEngine engine(cfg, seed, mode);
  return engine.run();
}

MissionMetrics metrics(const MissionRecord& record) {
  MissionMetrics m;
  m.success = record.outcome == Outcome::success;
  m.completion_time = record.completion_time;
  m.energy = record.energy;
  m.switches = record.switches;
  return m;
}

}  // namespace cogsim
