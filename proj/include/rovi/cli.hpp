#pragma once

#include "rovi/lmc.hpp"
#include "rovi/mfvi.hpp"
#include "rovi/rovi.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace rovi {

/// Fully resolved run configuration: config-file values overridden by
/// command-line flags. Serialized verbatim into every summary.
struct RunConfig {
  std::optional<std::string> preset;
  std::optional<nlohmann::json> inline_target;
  DictionaryConfig dictionary;
  QuadratureSpec quadrature;
  MfviRunConfig mfvi;
  RoviOptions rovi;
  LmcConfig lmc;
  long eval_samples = 65536;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "rovi-out";

  MixtureTarget resolve_target() const;
  nlohmann::json to_json() const;
};

RunConfig parse_run_config(const nlohmann::json& doc);

/// Entry point behind the rovi binary. Exit codes: 0 success, 1 input
/// error, 2 numerical error.
int cli_main(const std::vector<std::string>& args);

}  // namespace rovi
