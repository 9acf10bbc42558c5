#include "cogsim/config.hpp"

#include <fstream>
#include <sstream>

#include "cogsim/errors.hpp"
#include "json.hpp"

namespace cogsim {

namespace {

using Json = nlohmann::ordered_json;

Json vector_to_json(const Eigen::VectorXd& v) {
  Json arr = Json::array();
  for (int i = 0; i < v.size(); ++i) {
    arr.push_back(v(i));
  }
  return arr;
}

Eigen::VectorXd vector_from_json(const Json& arr, const std::string& key) {
  if (!arr.is_array() || arr.empty()) {
    throw ConfigError(key + ": expected a non-empty array of numbers");
  }
  Eigen::VectorXd v(static_cast<int>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) {
      throw ConfigError(key + ": expected numeric entries");
    }
    v(static_cast<int>(i)) = arr[i].get<double>();
  }
  return v;
}

const char* compression_name(HistoryCompression policy) {
  switch (policy) {
    case HistoryCompression::none:
      return "none";
    case HistoryCompression::bounding_box:
      return "bounding_box";
    case HistoryCompression::last_k:
      return "last_k";
  }
  return "bounding_box";
}

HistoryCompression compression_from(const std::string& name) {
  if (name == "none") return HistoryCompression::none;
  if (name == "bounding_box") return HistoryCompression::bounding_box;
  if (name == "last_k") return HistoryCompression::last_k;
  throw ConfigError("hazard.history_compression: unknown policy '" + name +
                    "'");
}

const char* trap_name(TrapCheck check) {
  switch (check) {
    case TrapCheck::center:
      return "center";
    case TrapCheck::footprint:
      return "footprint";
    case TrapCheck::both:
      return "both";
  }
  return "both";
}

TrapCheck trap_from(const std::string& name) {
  if (name == "center") return TrapCheck::center;
  if (name == "footprint") return TrapCheck::footprint;
  if (name == "both") return TrapCheck::both;
  throw ConfigError("mission.trap_check: unknown mode '" + name + "'");
}

PlanMode plan_mode_from(const std::string& name) {
  if (name == "cognitive") return PlanMode::cognitive;
  if (name == "s1" || name == "s1_only") return PlanMode::s1_only;
  if (name == "s2" || name == "s2_only") return PlanMode::s2_only;
  throw ConfigError("batch.modes: unknown mode '" + name + "'");
}

Json document_to_json(const ConfigDocument& doc) {
  const MissionConfig& m = doc.mission;
  Json j;
  j["agent"] = {{"dt", m.agent.dt},
                {"drag", m.agent.drag},
                {"mass", m.agent.mass},
                {"dim", m.agent.dim},
                {"v_max", m.agent.v_max},
                {"u_max", m.agent.u_max}};
  j["arena"] = {{"min", vector_to_json(m.arena.lower())},
                {"max", vector_to_json(m.arena.upper())}};
  j["start"] = {{"position", vector_to_json(m.start.position)},
                {"velocity", vector_to_json(m.start.velocity)}};
  j["goal"] = {{"center", vector_to_json(m.goal.centroid())},
               {"size", vector_to_json(m.goal.upper() - m.goal.lower())}};
  j["hazard"] = {{"p_birth", m.hazard.p_birth},
                 {"p_survive", m.hazard.p_survive},
                 {"mean_speed", m.hazard.mean_speed},
                 {"mean_direction", m.hazard.mean_direction},
                 {"sigma_speed", m.hazard.sigma_speed},
                 {"sigma_direction", m.hazard.sigma_direction},
                 {"gamma", m.hazard.gamma},
                 {"step_time", m.hazard.dt},
                 {"size_range", vector_to_json(m.hazard.size_range)},
                 {"resample_dims_per_step", m.hazard.resample_dims_per_step},
                 {"history_compression", compression_name(m.compression)},
                 {"last_k", m.last_k}};
  j["rrt"] = {{"step_size", m.rrt.step_size},
              {"max_iterations", m.rrt.max_iterations},
              {"goal_bias", m.rrt.goal_bias},
              {"collision_check_resolution", m.rrt.collision_check_resolution}};
  j["lqr"] = {{"q_weight", m.lqr.q_weight(0, 0)},
              {"r_weight", m.lqr.r_weight(0, 0)},
              {"riccati_tolerance", m.lqr.riccati_tolerance},
              {"riccati_max_iter", m.lqr.riccati_max_iter}};
  j["mpc"] = {{"horizon", m.mpc_horizon},
              {"kappa_mission", Json::array({m.kappa_mission(0), m.kappa_mission(1)})},
              {"kappa_energy", Json::array({m.kappa_energy(0), m.kappa_energy(1)})},
              {"big_m", m.big_m},
              {"strict_margin", m.strict_margin}};
  j["solver"] = {{"gap_tolerance", m.budget.gap_tolerance},
                 {"node_limit", m.budget.node_limit},
                 {"time_limit_s", m.budget.time_limit_s}};
  Json attention;
  attention["w1"] = Json::array({m.weights.w[0][0], m.weights.w[0][1],
                                 m.weights.w[0][2], m.weights.w[0][3]});
  attention["w2"] = Json::array({m.weights.w[1][0], m.weights.w[1][1],
                                 m.weights.w[1][2], m.weights.w[1][3]});
  attention["w3"] = Json::array({m.weights.w[2][0], m.weights.w[2][1],
                                 m.weights.w[2][2], m.weights.w[2][3]});
  Json performance = Json::array();
  for (int row = 0; row < 2; ++row) {
    performance.push_back(Json::array(
        {m.q_matrix.q(row, 0), m.q_matrix.q(row, 1), m.q_matrix.q(row, 2)}));
  }
  attention["performance"] = performance;
  Json h = Json::array();
  for (int row = 0; row < 2; ++row) {
    h.push_back(Json::array({m.h_matrix(row, 0), m.h_matrix(row, 1)}));
  }
  attention["h"] = h;
  j["attention"] = attention;
  j["mission"] = {{"max_steps", m.max_steps},
                  {"d_safe", m.d_safe},
                  {"response_time_mode",
                   m.response_mode == ResponseTimeMode::synthetic ? "synthetic"
                                                                  : "measured"},
                  {"synthetic_s1", m.synthetic_s1},
                  {"synthetic_s2", m.synthetic_s2},
                  {"replan_interval", m.replan_interval},
                  {"obstacle_margin", m.obstacle_margin},
                  {"trap_check", trap_name(m.trap_check)}};
  j["batch"] = {
      {"runs", doc.batch_runs},
      {"start_min", vector_to_json(doc.randomize.start_min)},
      {"start_max", vector_to_json(doc.randomize.start_max)},
      {"goal_center_min", vector_to_json(doc.randomize.goal_center_min)},
      {"goal_center_max", vector_to_json(doc.randomize.goal_center_max)},
      {"modes", [&doc] {
         Json arr = Json::array();
         for (PlanMode mode : doc.batch_modes) {
           arr.push_back(mode_name(mode));
         }
         return arr;
       }()}};
  return j;
}

void reject_unknown_keys(const Json& given, const Json& schema,
                         const std::string& prefix) {
  if (!given.is_object()) {
    return;
  }
  for (const auto& [key, value] : given.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!schema.contains(key)) {
      throw ConfigError("unknown configuration key '" + path + "'");
    }
    if (value.is_object()) {
      reject_unknown_keys(value, schema.at(key), path);
    }
  }
}

template <typename T>
void read_scalar(const Json& obj, const char* section, const char* key,
                 T& target) {
  if (!obj.contains(key)) {
    return;
  }
  try {
    target = obj.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(std::string(section) + "." + key + ": wrong type");
  }
}

void read_vector(const Json& obj, const char* section, const char* key,
                 Eigen::VectorXd& target) {
  if (obj.contains(key)) {
    target = vector_from_json(obj.at(key), std::string(section) + "." + key);
  }
}

void read_vector2(const Json& obj, const char* section, const char* key,
                  Eigen::Vector2d& target) {
  if (obj.contains(key)) {
    const Eigen::VectorXd v =
        vector_from_json(obj.at(key), std::string(section) + "." + key);
    if (v.size() != 2) {
      throw ConfigError(std::string(section) + "." + key +
                        ": expected 2 entries");
    }
    target = v;
  }
}

ConfigDocument document_from_json(const Json& j) {
  ConfigDocument doc;
  MissionConfig& m = doc.mission;

  if (j.contains("agent")) {
    const Json& a = j.at("agent");
    read_scalar(a, "agent", "dt", m.agent.dt);
    read_scalar(a, "agent", "drag", m.agent.drag);
    read_scalar(a, "agent", "mass", m.agent.mass);
    read_scalar(a, "agent", "dim", m.agent.dim);
    read_scalar(a, "agent", "v_max", m.agent.v_max);
    read_scalar(a, "agent", "u_max", m.agent.u_max);
  }
  const int dim = m.agent.dim;
  if (dim != 2 && dim != 3) {
    throw ConfigError("agent.dim: must be 2 or 3");
  }

  Eigen::VectorXd arena_min = m.arena.lower();
  Eigen::VectorXd arena_max = m.arena.upper();
  if (dim == 3 && arena_min.size() == 2) {
    // Default arena lifted to 3D with a 0..1000 vertical span.
    arena_min = Eigen::Vector3d(0.0, 0.0, 0.0);
    arena_max = Eigen::Vector3d(1000.0, 1000.0, 1000.0);
  }
  if (j.contains("arena")) {
    read_vector(j.at("arena"), "arena", "min", arena_min);
    read_vector(j.at("arena"), "arena", "max", arena_max);
  }
  if (arena_min.size() != dim || arena_max.size() != dim) {
    throw ConfigError("arena.min/max: expected " + std::to_string(dim) +
                      " entries");
  }
  m.arena = Cuboid::axis_aligned(arena_min, arena_max);
  m.hazard.arena = m.arena;

  Eigen::VectorXd goal_center = m.goal.centroid();
  Eigen::VectorXd goal_size = m.goal.upper() - m.goal.lower();
  if (dim == 3 && goal_center.size() == 2) {
    goal_center = Eigen::Vector3d(900.0, 900.0, 500.0);
    goal_size = Eigen::Vector3d(100.0, 100.0, 100.0);
  }
  if (j.contains("goal")) {
    read_vector(j.at("goal"), "goal", "center", goal_center);
    read_vector(j.at("goal"), "goal", "size", goal_size);
  }
  if (goal_center.size() != dim || goal_size.size() != dim) {
    throw ConfigError("goal.center/size: expected " + std::to_string(dim) +
                      " entries");
  }
  m.goal =
      Cuboid::axis_aligned(goal_center - 0.5 * goal_size,
                           goal_center + 0.5 * goal_size);

  Eigen::VectorXd start_pos = m.start.position;
  Eigen::VectorXd start_vel = m.start.velocity;
  if (dim == 3 && start_pos.size() == 2) {
    start_pos = Eigen::Vector3d(50.0, 50.0, 500.0);
    start_vel = Eigen::Vector3d::Zero();
  }
  if (j.contains("start")) {
    read_vector(j.at("start"), "start", "position", start_pos);
    read_vector(j.at("start"), "start", "velocity", start_vel);
  }
  m.start.position = start_pos;
  m.start.velocity = start_vel;

  if (j.contains("hazard")) {
    const Json& h = j.at("hazard");
    read_scalar(h, "hazard", "p_birth", m.hazard.p_birth);
    read_scalar(h, "hazard", "p_survive", m.hazard.p_survive);
    read_scalar(h, "hazard", "mean_speed", m.hazard.mean_speed);
    read_scalar(h, "hazard", "mean_direction", m.hazard.mean_direction);
    read_scalar(h, "hazard", "sigma_speed", m.hazard.sigma_speed);
    read_scalar(h, "hazard", "sigma_direction", m.hazard.sigma_direction);
    read_scalar(h, "hazard", "gamma", m.hazard.gamma);
    read_scalar(h, "hazard", "step_time", m.hazard.dt);
    read_vector2(h, "hazard", "size_range", m.hazard.size_range);
    read_scalar(h, "hazard", "resample_dims_per_step",
                m.hazard.resample_dims_per_step);
    if (h.contains("history_compression")) {
      m.compression =
          compression_from(h.at("history_compression").get<std::string>());
    }
    read_scalar(h, "hazard", "last_k", m.last_k);
  }

  if (j.contains("rrt")) {
    const Json& r = j.at("rrt");
    read_scalar(r, "rrt", "step_size", m.rrt.step_size);
    read_scalar(r, "rrt", "max_iterations", m.rrt.max_iterations);
    read_scalar(r, "rrt", "goal_bias", m.rrt.goal_bias);
    read_scalar(r, "rrt", "collision_check_resolution",
                m.rrt.collision_check_resolution);
  }

  double lqr_q = 2.0;
  double lqr_r = 0.1;
  double riccati_tol = m.lqr.riccati_tolerance;
  int riccati_iter = m.lqr.riccati_max_iter;
  if (j.contains("lqr")) {
    const Json& l = j.at("lqr");
    read_scalar(l, "lqr", "q_weight", lqr_q);
    read_scalar(l, "lqr", "r_weight", lqr_r);
    read_scalar(l, "lqr", "riccati_tolerance", riccati_tol);
    read_scalar(l, "lqr", "riccati_max_iter", riccati_iter);
  }
  m.lqr = LqrConfig::diagonal(lqr_q, lqr_r, dim);
  m.lqr.riccati_tolerance = riccati_tol;
  m.lqr.riccati_max_iter = riccati_iter;

  if (j.contains("mpc")) {
    const Json& p = j.at("mpc");
    read_scalar(p, "mpc", "horizon", m.mpc_horizon);
    read_vector2(p, "mpc", "kappa_mission", m.kappa_mission);
    read_vector2(p, "mpc", "kappa_energy", m.kappa_energy);
    read_scalar(p, "mpc", "big_m", m.big_m);
    read_scalar(p, "mpc", "strict_margin", m.strict_margin);
  }

  if (j.contains("solver")) {
    const Json& s = j.at("solver");
    read_scalar(s, "solver", "gap_tolerance", m.budget.gap_tolerance);
    read_scalar(s, "solver", "node_limit", m.budget.node_limit);
    read_scalar(s, "solver", "time_limit_s", m.budget.time_limit_s);
  }

  if (j.contains("attention")) {
    const Json& a = j.at("attention");
    const auto read_weights = [&a](const char* key,
                                   std::array<double, 4>& target) {
      if (!a.contains(key)) {
        return;
      }
      const Json& arr = a.at(key);
      if (!arr.is_array() || arr.size() != 4) {
        throw ConfigError(std::string("attention.") + key +
                          ": expected 4 entries");
      }
      for (int i = 0; i < 4; ++i) {
        target[static_cast<std::size_t>(i)] = arr[static_cast<std::size_t>(i)]
                                                  .get<double>();
      }
    };
    read_weights("w1", m.weights.w[0]);
    read_weights("w2", m.weights.w[1]);
    read_weights("w3", m.weights.w[2]);
    if (a.contains("performance")) {
      const Json& q = a.at("performance");
      if (!q.is_array() || q.size() != 2 || !q[0].is_array() ||
          q[0].size() != 3 || q[1].size() != 3) {
        throw ConfigError("attention.performance: expected a 2x3 matrix");
      }
      for (int row = 0; row < 2; ++row) {
        for (int col = 0; col < 3; ++col) {
          m.q_matrix.q(row, col) = q[static_cast<std::size_t>(row)]
                                    [static_cast<std::size_t>(col)]
                                        .get<double>();
        }
      }
    }
    if (a.contains("h")) {
      const Json& h = a.at("h");
      if (!h.is_array() || h.size() != 2 || !h[0].is_array() ||
          h[0].size() != 2 || h[1].size() != 2) {
        throw ConfigError("attention.h: expected a 2x2 matrix");
      }
      for (int row = 0; row < 2; ++row) {
        for (int col = 0; col < 2; ++col) {
          m.h_matrix(row, col) = h[static_cast<std::size_t>(row)]
                                  [static_cast<std::size_t>(col)]
                                      .get<double>();
        }
      }
    }
  }

  if (j.contains("mission")) {
    const Json& s = j.at("mission");
    read_scalar(s, "mission", "max_steps", m.max_steps);
    read_scalar(s, "mission", "d_safe", m.d_safe);
    if (s.contains("response_time_mode")) {
      const std::string mode = s.at("response_time_mode").get<std::string>();
      if (mode == "synthetic") {
        m.response_mode = ResponseTimeMode::synthetic;
      } else if (mode == "measured") {
        m.response_mode = ResponseTimeMode::measured;
      } else {
        throw ConfigError("mission.response_time_mode: unknown mode '" + mode +
                          "'");
      }
    }
    read_scalar(s, "mission", "synthetic_s1", m.synthetic_s1);
    read_scalar(s, "mission", "synthetic_s2", m.synthetic_s2);
    read_scalar(s, "mission", "replan_interval", m.replan_interval);
    read_scalar(s, "mission", "obstacle_margin", m.obstacle_margin);
    if (s.contains("trap_check")) {
      m.trap_check = trap_from(s.at("trap_check").get<std::string>());
    }
  }

  if (j.contains("batch")) {
    const Json& b = j.at("batch");
    read_scalar(b, "batch", "runs", doc.batch_runs);
    read_vector2(b, "batch", "start_min", doc.randomize.start_min);
    read_vector2(b, "batch", "start_max", doc.randomize.start_max);
    read_vector2(b, "batch", "goal_center_min", doc.randomize.goal_center_min);
    read_vector2(b, "batch", "goal_center_max", doc.randomize.goal_center_max);
    if (b.contains("modes")) {
      doc.batch_modes.clear();
      for (const auto& entry : b.at("modes")) {
        doc.batch_modes.push_back(plan_mode_from(entry.get<std::string>()));
      }
      if (doc.batch_modes.empty()) {
        throw ConfigError("batch.modes: needs at least one mode");
      }
    }
  }

  m.validate();
  if (doc.batch_runs < 1) {
    throw ConfigError("batch.runs: must be at least 1");
  }
  return doc;
}

}  // namespace

ConfigDocument parse_config(const std::string& text) {
  Json parsed;
  if (text.empty() ||
      text.find_first_not_of(" \t\r\n") == std::string::npos) {
    parsed = Json::object();
  } else {
    try {
      parsed = Json::parse(text);
    } catch (const Json::parse_error& err) {
      // nlohmann reports a byte offset; convert it to line and column.
      std::size_t line = 1;
      std::size_t column = 1;
      for (std::size_t i = 0; i + 1 < err.byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
          ++line;
          column = 1;
        } else {
          ++column;
        }
      }
      throw ConfigError("config syntax error at line " + std::to_string(line) +
                        ", column " + std::to_string(column));
    }
  }
  if (!parsed.is_object()) {
    throw ConfigError("config root must be an object");
  }
  const Json schema = document_to_json(ConfigDocument{});
  reject_unknown_keys(parsed, schema, "");
  return document_from_json(parsed);
}

std::string serialize_config(const ConfigDocument& doc) {
  return document_to_json(doc).dump(2) + "\n";
}

ConfigDocument load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config file: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace cogsim
