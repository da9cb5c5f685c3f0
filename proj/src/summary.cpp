#include "rovi/summary.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

namespace rovi {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InputError("cannot open output file " + path.string());
  out << std::setprecision(17);
  return out;
}

double json_safe(double v) { return std::isfinite(v) ? v : 0.0; }

}  // namespace

double auto_extent(const MixtureTarget& target) {
  double extent = 0;
  for (int k = 0; k < target.num_components(); ++k) {
    const auto& comp = target.components[k];
    double sd = std::sqrt(comp.covariance().diagonal().maxCoeff());
    extent = std::max(extent, comp.mean().cwiseAbs().maxCoeff() + 4.0 * sd);
  }
  return extent;
}

void emit_contour(const std::function<double(double, double)>& log_density,
                  const ContourSpec& spec, double extent,
                  const std::filesystem::path& path) {
  if (spec.nx < 2 || spec.ny < 2)
    throw InputError("emit_contour: grid must be at least 2x2");
  if (!(extent > 0)) throw InputError("emit_contour: extent must be > 0");
  std::ofstream out = open_out(path);
  out << "x,y,log_density\n";
  for (int iy = 0; iy < spec.ny; ++iy) {
    double y = -extent + 2.0 * extent * iy / (spec.ny - 1);
    for (int ix = 0; ix < spec.nx; ++ix) {
      double x = -extent + 2.0 * extent * ix / (spec.nx - 1);
      out << x << ',' << y << ',' << log_density(x, y) << '\n';
    }
  }
}

void write_samples_csv(const Matrix& samples, const std::vector<int>& chain_ids,
                       const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  for (int c = 0; c < samples.cols(); ++c) out << "x_" << (c + 1) << ',';
  out << "chain\n";
  for (long r = 0; r < samples.rows(); ++r) {
    for (int c = 0; c < samples.cols(); ++c) out << samples(r, c) << ',';
    out << (static_cast<size_t>(r) < chain_ids.size() ? chain_ids[r] : 0) << '\n';
  }
}

void write_trace_csv(const std::vector<RestartOutcome>& restarts,
                     const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "restart,iteration,kl\n";
  for (size_t r = 0; r < restarts.size(); ++r) {
    if (restarts[r].failed) continue;
    for (size_t i = 0; i < restarts[r].kl_trace.size(); ++i)
      out << r << ',' << i << ',' << restarts[r].kl_trace[i] << '\n';
  }
}

void write_trace_csv(const std::vector<double>& trace,
                     const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "iteration,kl\n";
  for (size_t i = 0; i < trace.size(); ++i) out << i << ',' << trace[i] << '\n';
}

nlohmann::json kl_to_json(const KlEstimate& estimate) {
  return {{"value", json_safe(estimate.value)},
          {"std_error", json_safe(estimate.std_error)},
          {"exact_normalizer", estimate.exact}};
}

nlohmann::json fit_summary_to_json(const FitSummary& summary) {
  nlohmann::json doc;
  doc["kl"] = kl_to_json(summary.kl);
  doc["mode_masses"] =
      std::vector<double>(summary.mode_masses.begin(), summary.mode_masses.end());
  doc["marginal_mean"] =
      std::vector<double>(summary.marginal_mean.begin(), summary.marginal_mean.end());
  doc["marginal_var"] =
      std::vector<double>(summary.marginal_var.begin(), summary.marginal_var.end());
  doc["n_samples"] = summary.n_samples;
  if (summary.quadrant) {
    doc["quadrant_mass_lower"] = summary.quadrant->first;
    doc["quadrant_mass_upper"] = summary.quadrant->second;
    doc["quadrant_exact"] = summary.quadrant_exact;
  }
  double min_mass = summary.mode_masses.minCoeff();
  doc["min_mode_mass"] = min_mass;
  doc["collapse_flag"] = min_mass <= 0.05;
  return doc;
}

nlohmann::json bound_report_to_json(const BoundReport& report) {
  nlohmann::json doc;
  doc["b_surrogate"] = report.b_surrogate;
  doc["theorem_applicable"] = report.theorem_applicable;
  if (std::isfinite(report.epsilon)) doc["epsilon"] = report.epsilon;
  if (std::isfinite(report.collapse)) doc["collapse_bound"] = report.collapse;
  if (std::isfinite(report.w_star)) doc["w_star"] = report.w_star;
  if (std::isfinite(report.prop1_bound)) {
    doc["prop1_bound"] = report.prop1_bound;
    std::vector<std::vector<double>> rot;
    for (long r = 0; r < report.prop1_rotation.rows(); ++r) {
      std::vector<double> row;
      for (long c = 0; c < report.prop1_rotation.cols(); ++c)
        row.push_back(report.prop1_rotation(r, c));
      rot.push_back(row);
    }
    doc["prop1_rotation"] = rot;
  }
  if (report.certificate) {
    const auto& cert = *report.certificate;
    doc["certificate"] = {{"j", cert.j},     {"k", cert.k},     {"b_j", cert.b_j},
                          {"b_k", cert.b_k}, {"s_j", cert.s_j}, {"s_k", cert.s_k},
                          {"epsilon", cert.epsilon}};
  }
  return doc;
}

std::string config_hash(const nlohmann::json& config) {
  std::string text = config.dump();
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return std::string(buf);
}

void write_json(const nlohmann::json& doc, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << doc.dump(2) << '\n';
}

}  // namespace rovi
