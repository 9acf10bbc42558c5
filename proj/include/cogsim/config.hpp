#pragma once

#include <string>

#include "cogsim/mission.hpp"
#include "cogsim/montecarlo.hpp"

namespace cogsim {

/// Full run configuration: one mission setup plus the batch settings.
/// Defaults are the reference evaluation values; a parsed document overrides
/// them key by key and unknown keys are rejected.
struct ConfigDocument {
  MissionConfig mission = MissionConfig::reference();
  int batch_runs = 200;
  RandomizeRanges randomize;
  std::vector<PlanMode> batch_modes{PlanMode::cognitive, PlanMode::s1_only,
                                    PlanMode::s2_only};
};

/// Parses a JSON document (empty or "{}" for pure defaults). Syntax errors
/// report line and column; semantic errors name the offending key.
ConfigDocument parse_config(const std::string& text);

/// Canonical serialization; parse(serialize(doc)) reproduces doc.
std::string serialize_config(const ConfigDocument& doc);

ConfigDocument load_config_file(const std::string& path);

}  // namespace cogsim
