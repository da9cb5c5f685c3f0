#pragma once

#include "rovi/lmc.hpp"
#include "rovi/rovi.hpp"
#include "rovi/theory.hpp"

#include <filesystem>
#include <functional>
#include <string>

#include "json.hpp"

namespace rovi {

/// Regular-grid evaluation of a 2-D log density, written as CSV columns
/// x,y,log_density. extent 0 auto-sizes to cover the target's means plus
/// four standard deviations.
struct ContourSpec {
  int nx = 200;
  int ny = 200;
  double extent = 0;
};

double auto_extent(const MixtureTarget& target);

void emit_contour(const std::function<double(double, double)>& log_density,
                  const ContourSpec& spec, double extent,
                  const std::filesystem::path& path);

void write_samples_csv(const Matrix& samples, const std::vector<int>& chain_ids,
                       const std::filesystem::path& path);

void write_trace_csv(const std::vector<RestartOutcome>& restarts,
                     const std::filesystem::path& path);

void write_trace_csv(const std::vector<double>& trace,
                     const std::filesystem::path& path);

nlohmann::json kl_to_json(const KlEstimate& estimate);
nlohmann::json fit_summary_to_json(const FitSummary& summary);
nlohmann::json bound_report_to_json(const BoundReport& report);

/// FNV-1a hash of the canonical config serialization, printed as hex.
std::string config_hash(const nlohmann::json& config);

void write_json(const nlohmann::json& doc, const std::filesystem::path& path);

}  // namespace rovi
