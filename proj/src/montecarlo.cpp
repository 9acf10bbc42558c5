#include "cogsim/montecarlo.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <thread>

#include "cogsim/errors.hpp"

namespace cogsim {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

MissionConfig scenario_for(const BatchConfig& cfg, std::uint64_t mission_seed) {
  MissionConfig mission = cfg.base;
  RngStream rng = RngStream::derive(mission_seed, "scenario");
  const auto& r = cfg.randomize;
  Eigen::VectorXd start(2);
  start(0) = rng.uniform(r.start_min(0), r.start_max(0));
  start(1) = rng.uniform(r.start_min(1), r.start_max(1));
  Eigen::VectorXd center(2);
  center(0) = rng.uniform(r.goal_center_min(0), r.goal_center_max(0));
  center(1) = rng.uniform(r.goal_center_min(1), r.goal_center_max(1));

  const Eigen::VectorXd size = cfg.base.goal.upper() - cfg.base.goal.lower();
  if (mission.agent.dim == 2) {
    mission.start.position = start;
    mission.goal = Cuboid::axis_aligned(center - 0.5 * size, center + 0.5 * size);
  } else {
    // 3D scenarios randomize the ground coordinates and keep the base z.
    mission.start.position.head(2) = start;
    Eigen::VectorXd c3 = cfg.base.goal.centroid();
    c3.head(2) = center;
    mission.goal = Cuboid::axis_aligned(c3 - 0.5 * size, c3 + 0.5 * size);
  }
  mission.start.velocity = cfg.base.start.velocity;
  return mission;
}

ModeSummary summarize(const std::vector<MissionMetrics>& metrics) {
  ModeSummary s;
  s.runs = static_cast<int>(metrics.size());
  double completion_sum = 0.0;
  double energy_sum = 0.0;
  for (const auto& m : metrics) {
    if (m.success) {
      ++s.successes;
      completion_sum += static_cast<double>(m.completion_time);
      energy_sum += m.energy;
    }
  }
  const double n = static_cast<double>(s.runs);
  s.success_rate = s.runs > 0 ? s.successes / n : 0.0;
  s.success_half_width =
      s.runs > 0
          ? 1.96 * std::sqrt(s.success_rate * (1.0 - s.success_rate) / n)
          : 0.0;
  if (s.successes > 0) {
    const double k = static_cast<double>(s.successes);
    s.mean_completion = completion_sum / k;
    s.mean_energy = energy_sum / k;
    double completion_var = 0.0;
    double energy_var = 0.0;
    for (const auto& m : metrics) {
      if (m.success) {
        completion_var += std::pow(m.completion_time - s.mean_completion, 2);
        energy_var += std::pow(m.energy - s.mean_energy, 2);
      }
    }
    if (s.successes > 1) {
      completion_var /= (k - 1.0);
      energy_var /= (k - 1.0);
    }
    s.completion_half_width = 1.96 * std::sqrt(completion_var / k);
    s.energy_half_width = 1.96 * std::sqrt(energy_var / k);
  } else {
    s.mean_completion = kNan;
    s.mean_energy = kNan;
    s.completion_half_width = kNan;
    s.energy_half_width = kNan;
  }
  return s;
}

int mode_index(const BatchSummary& summary, PlanMode mode) {
  for (std::size_t i = 0; i < summary.modes.size(); ++i) {
    if (summary.modes[i] == mode) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

}  // namespace

void BatchConfig::validate() const {
  if (runs < 1) {
    throw ConfigError("batch runs must be at least 1");
  }
  if (modes.empty()) {
    throw ConfigError("batch needs at least one mode");
  }
  if (jobs < 1) {
    throw ConfigError("batch jobs must be at least 1");
  }
  base.validate();
}

const char* mode_name(PlanMode mode) {
  switch (mode) {
    case PlanMode::cognitive:
      return "cognitive";
    case PlanMode::s1_only:
      return "s1_only";
    case PlanMode::s2_only:
      return "s2_only";
  }
  return "unknown";
}

BatchSummary run_batch(const BatchConfig& cfg) {
  cfg.validate();
  BatchSummary summary;
  summary.seed = cfg.seed;
  summary.runs = cfg.runs;
  summary.modes = cfg.modes;
  summary.metrics.assign(cfg.modes.size(),
                         std::vector<MissionMetrics>(cfg.runs));

  std::atomic<int> next{0};
  const auto worker = [&cfg, &summary, &next] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= cfg.runs) {
        return;
      }
      const std::uint64_t mission_seed =
          RngStream::mix(cfg.seed, static_cast<std::uint64_t>(i));
      const MissionConfig mission = scenario_for(cfg, mission_seed);
      for (std::size_t m = 0; m < cfg.modes.size(); ++m) {
        const MissionRecord record =
            run_mission(mission, mission_seed, cfg.modes[m]);
        summary.metrics[m][static_cast<std::size_t>(i)] = metrics(record);
      }
    }
  };

  const int threads = std::min(cfg.jobs, cfg.runs);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back(worker);
    }
    for (auto& thread : pool) {
      thread.join();
    }
  }

  summary.per_mode.reserve(cfg.modes.size());
  for (const auto& mode_metrics : summary.metrics) {
    summary.per_mode.push_back(summarize(mode_metrics));
  }
  return summary;
}

std::string compare(const BatchSummary& summary) {
  if (summary.modes.size() < 2) {
    throw InputError("compare needs at least two modes");
  }
  char line[256];
  std::ostringstream out;
  out << "mode        runs  success            completion (successes)  "
         "energy (successes)\n";
  for (std::size_t m = 0; m < summary.modes.size(); ++m) {
    const ModeSummary& s = summary.per_mode[m];
    std::snprintf(line, sizeof(line),
                  "%-10s  %4d  %.3f +- %.3f    %8.2f +- %6.2f      %10.3f "
                  "+- %8.3f\n",
                  mode_name(summary.modes[m]), s.runs, s.success_rate,
                  s.success_half_width, s.mean_completion,
                  s.completion_half_width, s.mean_energy, s.energy_half_width);
    out << line;
  }

  const int s1 = mode_index(summary, PlanMode::s1_only);
  const int s2 = mode_index(summary, PlanMode::s2_only);
  const int cc = mode_index(summary, PlanMode::cognitive);
  if (s1 >= 0 && s2 >= 0) {
    out << "\norderings (means over successes):\n";
    const auto fmt_delta = [&line, &out](const char* label, double a, double b) {
      std::snprintf(line, sizeof(line), "  %-34s %10.3f vs %10.3f  [%s]\n",
                    label, a, b, a <= b ? "ok" : "violated");
      out << line;
    };
    if (cc >= 0) {
      fmt_delta("completion: s2_only <= cognitive",
                summary.per_mode[s2].mean_completion,
                summary.per_mode[cc].mean_completion);
      fmt_delta("completion: cognitive <= s1_only",
                summary.per_mode[cc].mean_completion,
                summary.per_mode[s1].mean_completion);
    } else {
      fmt_delta("completion: s2_only <= s1_only",
                summary.per_mode[s2].mean_completion,
                summary.per_mode[s1].mean_completion);
    }
    fmt_delta("energy: s2_only <= s1_only", summary.per_mode[s2].mean_energy,
              summary.per_mode[s1].mean_energy);
  }
  return out.str();
}

OrderingBootstrap bootstrap_orderings(const BatchSummary& summary,
                                      int resamples, std::uint64_t seed) {
  const int s1 = mode_index(summary, PlanMode::s1_only);
  const int s2 = mode_index(summary, PlanMode::s2_only);
  const int cc = mode_index(summary, PlanMode::cognitive);
  if (s1 < 0 || s2 < 0) {
    throw InputError("bootstrap needs s1_only and s2_only runs");
  }
  RngStream rng = RngStream::derive(seed, "bootstrap");
  OrderingBootstrap result;
  result.resamples = resamples;
  int completion_violations = 0;
  int energy_violations = 0;
  const int runs = summary.runs;
  std::vector<int> picks(static_cast<std::size_t>(runs));
  for (int b = 0; b < resamples; ++b) {
    for (int i = 0; i < runs; ++i) {
      picks[static_cast<std::size_t>(i)] =
          static_cast<int>(rng.below(static_cast<std::uint64_t>(runs)));
    }
    const auto mean_of = [&](int mode, bool energy) {
      double sum = 0.0;
      int count = 0;
      for (int pick : picks) {
        const MissionMetrics& m =
            summary.metrics[static_cast<std::size_t>(mode)]
                           [static_cast<std::size_t>(pick)];
        if (m.success) {
          sum += energy ? m.energy : static_cast<double>(m.completion_time);
          ++count;
        }
      }
      return count > 0 ? sum / count : kNan;
    };
    const double ct_s1 = mean_of(s1, false);
    const double ct_s2 = mean_of(s2, false);
    bool ct_ok = true;
    if (cc >= 0) {
      const double ct_cc = mean_of(cc, false);
      ct_ok = !(ct_s2 > ct_cc) && !(ct_cc > ct_s1);
    } else {
      ct_ok = !(ct_s2 > ct_s1);
    }
    if (!ct_ok) {
      ++completion_violations;
    }
    if (mean_of(s2, true) > mean_of(s1, true)) {
      ++energy_violations;
    }
  }
  result.completion_violation_rate =
      resamples > 0 ? static_cast<double>(completion_violations) / resamples
                    : 0.0;
  result.energy_violation_rate =
      resamples > 0 ? static_cast<double>(energy_violations) / resamples : 0.0;
  return result;
}

}  // namespace cogsim
