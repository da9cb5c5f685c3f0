#pragma once

#include "rovi/target.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rovi {

/// Built-in 2-D mixture targets used by the experiment subcommand.
struct ExperimentPreset {
  std::string name;
  MixtureTarget target;
  std::string note;
};

const std::vector<ExperimentPreset>& experiment_presets();

std::optional<ExperimentPreset> find_preset(const std::string& name);

std::vector<std::string> preset_names();

}  // namespace rovi
