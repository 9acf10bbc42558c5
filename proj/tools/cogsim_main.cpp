// Command-line front end: simulate one mission, run a Monte-Carlo batch,
// replay a mission log, or emit plot data from a log.

#include <cstdio>
#include <fstream>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "cogsim/config.hpp"
#include "cogsim/errors.hpp"
#include "cogsim/logio.hpp"
#include "cogsim/mission.hpp"
#include "cogsim/montecarlo.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

cogsim::PlanMode parse_mode(const std::string& name) {
  if (name == "cognitive") return cogsim::PlanMode::cognitive;
  if (name == "s1" || name == "s1_only") return cogsim::PlanMode::s1_only;
  if (name == "s2" || name == "s2_only") return cogsim::PlanMode::s2_only;
  throw cogsim::ConfigError("unknown mode '" + name + "'");
}

cogsim::ConfigDocument load_or_default(const std::string& config_path) {
  if (config_path.empty()) {
    return cogsim::ConfigDocument{};
  }
  return cogsim::load_config_file(config_path);
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw cogsim::IoError("cannot create output directory: " + dir);
  }
}

int run_simulate(const std::string& config_path, std::uint64_t seed,
                 const std::string& out_dir, const std::string& mode_name) {
  const cogsim::ConfigDocument doc = load_or_default(config_path);
  const cogsim::PlanMode mode = parse_mode(mode_name);
  const cogsim::MissionRecord record =
      cogsim::run_mission(doc.mission, seed, mode);

  ensure_dir(out_dir);
  const std::string log_path = out_dir + "/mission_log.jsonl";
  cogsim::write_mission_log(record, doc.mission, log_path);
  cogsim::write_plot_csv(record, out_dir + "/mission_plot.csv");
  cogsim::write_trajectory_svg(record, doc.mission,
                               out_dir + "/trajectory.svg");

  const cogsim::MissionMetrics m = cogsim::metrics(record);
  std::printf("mission: mode=%s seed=%llu outcome=%s steps=%zu\n",
              cogsim::mode_name(mode),
              static_cast<unsigned long long>(seed),
              m.success ? "success"
                        : (record.outcome == cogsim::Outcome::timeout
                               ? "timeout"
                               : "failure_trapped"),
              record.steps.size());
  std::printf("  completion_time=%ld energy=%.3f switches=%ld\n",
              m.completion_time, m.energy, m.switches);
  std::printf("  log: %s\n", log_path.c_str());
  return kExitOk;
}

int run_montecarlo(const std::string& config_path, int runs,
                   std::uint64_t seed, const std::string& out_dir, int jobs,
                   const std::vector<std::string>& mode_names) {
  const cogsim::ConfigDocument doc = load_or_default(config_path);
  cogsim::BatchConfig batch;
  batch.base = doc.mission;
  batch.randomize = doc.randomize;
  batch.runs = runs > 0 ? runs : doc.batch_runs;
  batch.seed = seed;
  batch.jobs = jobs > 0
                   ? jobs
                   : static_cast<int>(
                         std::max(1u, std::thread::hardware_concurrency()));
  if (!mode_names.empty()) {
    batch.modes.clear();
    for (const auto& name : mode_names) {
      batch.modes.push_back(parse_mode(name));
    }
  } else {
    batch.modes = doc.batch_modes;
  }

  const cogsim::BatchSummary summary = cogsim::run_batch(batch);
  ensure_dir(out_dir);
  cogsim::write_summary_csv(summary, out_dir + "/summary.csv");
  std::string report;
  if (summary.modes.size() >= 2) {
    report = cogsim::compare(summary);
  } else {
    char line[160];
    std::snprintf(line, sizeof(line), "%s: success_rate=%.3f over %d runs\n",
                  cogsim::mode_name(summary.modes[0]),
                  summary.per_mode[0].success_rate, summary.runs);
    report = line;
  }
  std::ofstream(out_dir + "/report.txt") << report;
  std::fputs(report.c_str(), stdout);
  std::printf("summary: %s/summary.csv\n", out_dir.c_str());
  return kExitOk;
}

int run_replay(const std::string& log_path) {
  const cogsim::MissionLog log = cogsim::read_mission_log(log_path);
  const cogsim::ReplayReport report = cogsim::replay_mission_log(log);
  std::printf("%s: %s (max position gap %.3g)\n",
              report.ok ? "PASS" : "FAIL", report.message.c_str(),
              report.max_position_gap);
  const cogsim::MissionMetrics m = cogsim::metrics(log.record);
  std::printf("  outcome=%s completion_time=%ld energy=%.3f switches=%ld\n",
              log.record.outcome == cogsim::Outcome::success
                  ? "success"
                  : (log.record.outcome == cogsim::Outcome::timeout
                         ? "timeout"
                         : "failure_trapped"),
              m.completion_time, m.energy, m.switches);
  if (!report.ok) {
    throw cogsim::IoError("replay mismatch in " + log_path);
  }
  return kExitOk;
}

int run_plot(const std::string& log_path, const std::string& out_dir) {
  const cogsim::MissionLog log = cogsim::read_mission_log(log_path);
  ensure_dir(out_dir);
  cogsim::write_plot_csv(log.record, out_dir + "/mission_plot.csv");
  std::printf("plot data: %s/mission_plot.csv\n", out_dir.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-process planning simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::string log_path;
  std::string mode_name = "cognitive";
  std::vector<std::string> mode_names;
  std::uint64_t seed = 0;
  int runs = 0;
  int jobs = 0;

  auto* simulate = app.add_subcommand("simulate", "Run one mission");
  simulate->add_option("--config", config_path, "Config file (JSON)");
  simulate->add_option("--seed", seed, "Random seed");
  simulate->add_option("--out", out_dir, "Output directory");
  simulate->add_option("--mode", mode_name, "cognitive|s1|s2");

  auto* montecarlo =
      app.add_subcommand("montecarlo", "Run a randomized mission batch");
  montecarlo->add_option("--config", config_path, "Config file (JSON)");
  montecarlo->add_option("--runs", runs, "Mission count (overrides config)");
  montecarlo->add_option("--seed", seed, "Batch seed");
  montecarlo->add_option("--out", out_dir, "Output directory");
  montecarlo->add_option("--jobs", jobs, "Worker threads");
  montecarlo->add_option("--modes", mode_names, "Subset of cognitive|s1|s2");

  auto* replay = app.add_subcommand("replay", "Verify a mission log");
  replay->add_option("--log", log_path, "Mission log (JSON-lines)")
      ->required();

  auto* plot = app.add_subcommand("plot", "Emit plot data from a log");
  plot->add_option("--log", log_path, "Mission log (JSON-lines)")->required();
  plot->add_option("--out", out_dir, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      return run_simulate(config_path, seed, out_dir, mode_name);
    }
    if (montecarlo->parsed()) {
      return run_montecarlo(config_path, runs, seed, out_dir, jobs,
                            mode_names);
    }
    if (replay->parsed()) {
      return run_replay(log_path);
    }
    if (plot->parsed()) {
      return run_plot(log_path, out_dir);
    }
  } catch (const cogsim::ConfigError& err) {
    std::fprintf(stderr, "config error: %s\n", err.what());
    return kExitConfig;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kExitRuntime;
  }
  return kExitOk;
}
