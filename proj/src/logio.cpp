#include "cogsim/logio.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cogsim/errors.hpp"
#include "json.hpp"

namespace cogsim {

namespace {

using Json = nlohmann::ordered_json;

Json vec_json(const Eigen::VectorXd& v) {
  Json arr = Json::array();
  for (int i = 0; i < v.size(); ++i) {
    arr.push_back(v(i));
  }
  return arr;
}

Eigen::VectorXd vec_from(const Json& arr) {
  Eigen::VectorXd v(static_cast<int>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    v(static_cast<int>(i)) = arr[i].get<double>();
  }
  return v;
}

const char* outcome_name(Outcome outcome) {
  switch (outcome) {
    case Outcome::success:
      return "success";
    case Outcome::failure_trapped:
      return "failure_trapped";
    case Outcome::timeout:
      return "timeout";
  }
  return "timeout";
}

Outcome outcome_from(const std::string& name) {
  if (name == "success") return Outcome::success;
  if (name == "failure_trapped") return Outcome::failure_trapped;
  if (name == "timeout") return Outcome::timeout;
  throw IoError("mission log has unknown outcome '" + name + "'");
}

PlanMode mode_from(const std::string& name) {
  if (name == "cognitive") return PlanMode::cognitive;
  if (name == "s1_only") return PlanMode::s1_only;
  if (name == "s2_only") return PlanMode::s2_only;
  throw IoError("mission log has unknown mode '" + name + "'");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write file: " + path);
  }
  return out;
}

}  // namespace

void write_mission_log(const MissionRecord& record, const MissionConfig& cfg,
                       const std::string& path) {
  std::ofstream out = open_out(path);
  Json header;
  header["type"] = "header";
  header["mode"] = mode_name(record.mode);
  header["seed"] = record.seed;
  header["agent"] = {{"dt", cfg.agent.dt},       {"drag", cfg.agent.drag},
                     {"mass", cfg.agent.mass},   {"dim", cfg.agent.dim},
                     {"v_max", cfg.agent.v_max}, {"u_max", cfg.agent.u_max}};
  header["start"] = {{"position", vec_json(cfg.start.position)},
                     {"velocity", vec_json(cfg.start.velocity)}};
  out << header.dump() << "\n";

  for (const auto& step : record.steps) {
    Json row;
    row["type"] = "step";
    row["t"] = step.t;
    row["active"] = step.active;
    row["xi"] = vec_json(step.xi);
    row["probs"] = vec_json(step.probs);
    row["attended"] = step.attended;
    row["psi"] = vec_json(step.psi);
    row["hazard_distance"] = std::isfinite(step.hazard_distance)
                                 ? Json(step.hazard_distance)
                                 : Json("inf");
    row["position"] = vec_json(step.state.position);
    row["velocity"] = vec_json(step.state.velocity);
    row["control"] = vec_json(step.control);
    row["control_applied"] = step.control_applied;
    row["response_time"] = step.response_time;
    row["propagations"] = step.propagations;
    row["plan_id"] = step.plan_id;
    row["replanned"] = step.replanned;
    row["field_time"] = step.field_time;
    Json fronts = Json::array();
    for (const auto& front : step.fronts) {
      Json f;
      f["id"] = front.id;
      f["speed"] = front.speed;
      f["direction"] = front.direction;
      f["center"] = vec_json(front.center);
      f["dims"] = vec_json(front.dims);
      f["born_at"] = front.born_at;
      fronts.push_back(std::move(f));
    }
    row["fronts"] = std::move(fronts);
    out << row.dump() << "\n";
  }

  Json footer;
  footer["type"] = "summary";
  footer["outcome"] = outcome_name(record.outcome);
  footer["completion_time"] = record.completion_time;
  footer["energy"] = record.energy;
  footer["switches"] = record.switches;
  out << footer.dump() << "\n";
}

MissionLog read_mission_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open mission log: " + path);
  }
  MissionLog log;
  bool have_header = false;
  bool have_summary = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    Json row;
    try {
      row = Json::parse(line);
    } catch (const Json::parse_error&) {
      throw IoError("malformed mission log line in " + path);
    }
    const std::string type = row.at("type").get<std::string>();
    if (type == "header") {
      log.header.mode = mode_from(row.at("mode").get<std::string>());
      log.header.seed = row.at("seed").get<std::uint64_t>();
      const Json& agent = row.at("agent");
      log.header.agent.dt = agent.at("dt").get<double>();
      log.header.agent.drag = agent.at("drag").get<double>();
      log.header.agent.mass = agent.at("mass").get<double>();
      log.header.agent.dim = agent.at("dim").get<int>();
      log.header.agent.v_max = agent.at("v_max").get<double>();
      log.header.agent.u_max = agent.at("u_max").get<double>();
      log.header.start.position = vec_from(row.at("start").at("position"));
      log.header.start.velocity = vec_from(row.at("start").at("velocity"));
      log.record.mode = log.header.mode;
      log.record.seed = log.header.seed;
      have_header = true;
    } else if (type == "step") {
      StepTelemetry step;
      step.t = row.at("t").get<long>();
      step.active = row.at("active").get<int>();
      const Eigen::VectorXd xi = vec_from(row.at("xi"));
      const Eigen::VectorXd probs = vec_from(row.at("probs"));
      const Eigen::VectorXd psi = vec_from(row.at("psi"));
      step.xi = xi;
      step.probs = probs;
      step.psi = psi;
      step.attended = row.at("attended").get<int>();
      if (row.at("hazard_distance").is_string()) {
        step.hazard_distance = std::numeric_limits<double>::infinity();
      } else {
        step.hazard_distance = row.at("hazard_distance").get<double>();
      }
      step.state.position = vec_from(row.at("position"));
      step.state.velocity = vec_from(row.at("velocity"));
      step.control = vec_from(row.at("control"));
      step.control_applied = row.at("control_applied").get<bool>();
      step.response_time = row.at("response_time").get<double>();
      step.propagations = row.at("propagations").get<int>();
      step.plan_id = row.at("plan_id").get<long>();
      step.replanned = row.at("replanned").get<bool>();
      step.field_time = row.at("field_time").get<long>();
      for (const auto& f : row.at("fronts")) {
        FrontSnapshot front;
        front.id = f.at("id").get<int>();
        front.speed = f.at("speed").get<double>();
        front.direction = f.at("direction").get<double>();
        front.center = vec_from(f.at("center"));
        front.dims = vec_from(f.at("dims"));
        front.born_at = f.at("born_at").get<long>();
        step.fronts.push_back(std::move(front));
      }
      log.record.steps.push_back(std::move(step));
    } else if (type == "summary") {
      log.record.outcome = outcome_from(row.at("outcome").get<std::string>());
      log.record.completion_time = row.at("completion_time").get<long>();
      log.record.energy = row.at("energy").get<double>();
      log.record.switches = row.at("switches").get<long>();
      have_summary = true;
    } else {
      throw IoError("mission log has unknown record type '" + type + "'");
    }
  }
  if (!have_header || !have_summary) {
    throw IoError("mission log is incomplete: " + path);
  }
  return log;
}

ReplayReport replay_mission_log(const MissionLog& log) {
  ReplayReport report;
  AgentState state = log.header.start;
  for (const auto& step : log.record.steps) {
    if (!step.control_applied) {
      continue;
    }
    state = cogsim::step(state, ControlInput{step.control}, log.header.agent);
    const double gap = (state.position - step.state.position)
                           .cwiseAbs()
                           .maxCoeff();
    report.max_position_gap = std::max(report.max_position_gap, gap);
    if (gap > 1e-9) {
      report.ok = false;
      report.message = "replay diverged at t=" + std::to_string(step.t);
      return report;
    }
    ++report.steps_checked;
  }
  report.ok = true;
  report.message = "replay matched " + std::to_string(report.steps_checked) +
                   " steps";
  return report;
}

void write_plot_csv(const MissionRecord& record, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "t,xi1,xi2,xi3,attended,psi1,psi2,active,x,y\n";
  char line[512];
  for (const auto& step : record.steps) {
    std::snprintf(line, sizeof(line),
                  "%ld,%.17g,%.17g,%.17g,%d,%.17g,%.17g,%d,%.17g,%.17g\n",
                  step.t, step.xi(0), step.xi(1), step.xi(2), step.attended + 1,
                  step.psi(0), step.psi(1), step.active, step.state.position(0),
                  step.state.position(1));
    out << line;
  }
}

void write_summary_csv(const BatchSummary& summary, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "mode,runs,successes,success_rate,success_half_width,"
         "mean_completion,completion_half_width,mean_energy,"
         "energy_half_width\n";
  char line[512];
  for (std::size_t m = 0; m < summary.modes.size(); ++m) {
    const ModeSummary& s = summary.per_mode[m];
    std::snprintf(line, sizeof(line),
                  "%s,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  mode_name(summary.modes[m]), s.runs, s.successes,
                  s.success_rate, s.success_half_width, s.mean_completion,
                  s.completion_half_width, s.mean_energy, s.energy_half_width);
    out << line;
  }
}

void write_trajectory_svg(const MissionRecord& record, const MissionConfig& cfg,
                          const std::string& path) {
  std::ofstream out = open_out(path);
  const Eigen::VectorXd lo = cfg.arena.lower();
  const Eigen::VectorXd hi = cfg.arena.upper();
  const double width = hi(0) - lo(0);
  const double height = hi(1) - lo(1);
  const double scale = 800.0 / std::max(width, height);
  const auto sx = [&](double x) { return (x - lo(0)) * scale; };
  const auto sy = [&](double y) { return (hi(1) - y) * scale; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
      << width * scale << "\" height=\"" << height * scale << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << width * scale << "\" height=\""
      << height * scale
      << "\" fill=\"#fcfcf7\" stroke=\"#444\" stroke-width=\"2\"/>\n";

  // Final footprints.
  if (!record.steps.empty()) {
    for (const auto& front : record.steps.back().fronts) {
      const double fx = sx(front.center(0) - 0.5 * front.dims(0));
      const double fy = sy(front.center(1) + 0.5 * front.dims(1));
      out << "<rect x=\"" << fx << "\" y=\"" << fy << "\" width=\""
          << front.dims(0) * scale << "\" height=\"" << front.dims(1) * scale
          << "\" fill=\"#e07050\" fill-opacity=\"0.5\" stroke=\"#a03020\"/>\n";
    }
  }

  // Goal region.
  const Eigen::VectorXd glo = cfg.goal.lower();
  const Eigen::VectorXd ghi = cfg.goal.upper();
  out << "<rect x=\"" << sx(glo(0)) << "\" y=\"" << sy(ghi(1)) << "\" width=\""
      << (ghi(0) - glo(0)) * scale << "\" height=\""
      << (ghi(1) - glo(1)) * scale
      << "\" fill=\"#70c070\" fill-opacity=\"0.5\" stroke=\"#207020\"/>\n";

  // Executed trajectory, one segment per step, colored by the active system.
  Eigen::VectorXd prev = cfg.start.position;
  for (const auto& step : record.steps) {
    if (!step.control_applied) {
      continue;
    }
    const char* color = step.active == 1 ? "#3060d0" : "#d040a0";
    out << "<line x1=\"" << sx(prev(0)) << "\" y1=\"" << sy(prev(1))
        << "\" x2=\"" << sx(step.state.position(0)) << "\" y2=\""
        << sy(step.state.position(1)) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    prev = step.state.position;
  }
  out << "<circle cx=\"" << sx(cfg.start.position(0)) << "\" cy=\""
      << sy(cfg.start.position(1))
      << "\" r=\"4\" fill=\"#000\"/>\n";
  out << "</svg>\n";
}

}  // namespace cogsim
