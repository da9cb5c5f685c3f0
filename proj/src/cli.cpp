#include "rovi/cli.hpp"

#include "rovi/gradcheck.hpp"
#include "rovi/presets.hpp"
#include "rovi/summary.hpp"

#include <chrono>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

namespace rovi {

namespace {

// Fixed per-method stream indices XORed into the master seed so the three
// methods never share RNG streams.
constexpr std::uint64_t kMfviStream = 1;
constexpr std::uint64_t kRoviStream = 2;
constexpr std::uint64_t kLmcStream = 3;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::function<double(double, double)> target_log_density_2d(
    const MixtureTarget& target) {
  auto shared = std::make_shared<MixtureTarget>(target);
  return [shared](double x, double y) {
    Vector p(2);
    p << x, y;
    return mixture_log_density(*shared, p);
  };
}

std::function<double(double, double)> pushforward_log_density_2d(
    const Dictionary& dict, const SeparableMapParams& params, const Matrix& rotation) {
  auto d = std::make_shared<Dictionary>(dict);
  auto p = std::make_shared<SeparableMapParams>(params);
  Matrix rot_t = rotation.transpose();
  return [d, p, rot_t](double x, double y) {
    Vector z(2);
    z << x, y;
    Vector back = rot_t * z;
    Vector pre(2);
    double log_jac = 0;
    for (int i = 0; i < 2; ++i) {
      pre[i] = invert_coordinate(*d, *p, i, back[i]);
      double deriv = 0;
      for (int t = 0; t < d->size(); ++t)
        deriv += p->coeffs(t, i) * d->entry(t).slope(pre[i]);
      log_jac += std::log(deriv);
    }
    double log_rho = -std::log(2.0 * M_PI) - 0.5 * pre.squaredNorm();
    return log_rho - log_jac;
  };
}

struct MethodArtifacts {
  nlohmann::json summary;
  double seconds = 0;
};

MethodArtifacts run_mfvi_method(const RunConfig& config, const MixtureTarget& target,
                                bool emit_files) {
  auto t0 = std::chrono::steady_clock::now();
  Dictionary dict = Dictionary::from_config(config.dictionary);
  GramMatrix gram = build_gram(dict);
  Potential potential = make_potential(target);

  MfviRunConfig mfvi_config = config.mfvi;
  mfvi_config.seed = config.seed ^ kMfviStream;
  if (mfvi_config.smoothness <= 0)
    mfvi_config.smoothness = default_smoothness(target);
  QuadratureSet quad = config.quadrature.build(target.dim(), mfvi_config.seed);
  DictionaryTable table = build_table(dict, quad);

  MfviFit fit = run_mfvi(table, dict, gram, potential, mfvi_config);
  FitSummary summary =
      fit_summary(dict, fit.params, Matrix::Identity(target.dim(), target.dim()),
                  target, config.eval_samples, mfvi_config.seed);

  MethodArtifacts artifacts;
  artifacts.summary = fit_summary_to_json(summary);
  artifacts.summary["iterations"] = fit.iterations;
  artifacts.summary["quadrature_kl"] = kl_to_json(fit.final_kl);
  if (emit_files) {
    write_trace_csv(fit.kl_trace, config.out_dir / "mfvi_trace.csv");
    if (target.dim() == 2)
      emit_contour(pushforward_log_density_2d(
                       dict, fit.params, Matrix::Identity(2, 2)),
                   ContourSpec{}, auto_extent(target),
                   config.out_dir / "contour_mfvi.csv");
  }
  artifacts.seconds = seconds_since(t0);
  return artifacts;
}

MethodArtifacts run_rovi_method(const RunConfig& config, const MixtureTarget& target,
                                bool emit_files) {
  auto t0 = std::chrono::steady_clock::now();
  RoviOptions options = config.rovi;
  options.dictionary = config.dictionary;
  options.quadrature = config.quadrature;
  options.seed = config.seed ^ kRoviStream;

  RoviResult result = run_rovi(target, options);
  Dictionary dict = Dictionary::from_config(config.dictionary);
  FitSummary summary = fit_summary(dict, result.best_params, result.best_rotation,
                                   target, config.eval_samples, options.seed);

  MethodArtifacts artifacts;
  artifacts.summary = fit_summary_to_json(summary);
  artifacts.summary["best_restart"] = result.best_restart;
  artifacts.summary["quadrature_kl"] = kl_to_json(result.final_kl);
  std::vector<std::vector<double>> rot;
  for (long r = 0; r < result.best_rotation.rows(); ++r)
    rot.emplace_back(result.best_rotation.row(r).begin(),
                     result.best_rotation.row(r).end());
  artifacts.summary["rotation"] = rot;
  int failed = 0;
  for (const auto& restart : result.restarts) failed += restart.failed ? 1 : 0;
  artifacts.summary["failed_restarts"] = failed;
  if (emit_files) {
    write_trace_csv(result.restarts, config.out_dir / "rovi_trace.csv");
    if (target.dim() == 2)
      emit_contour(pushforward_log_density_2d(dict, result.best_params,
                                              result.best_rotation),
                   ContourSpec{}, auto_extent(target),
                   config.out_dir / "contour_rovi.csv");
  }
  artifacts.seconds = seconds_since(t0);
  return artifacts;
}

MethodArtifacts run_lmc_method(const RunConfig& config, const MixtureTarget& target,
                               bool emit_files) {
  auto t0 = std::chrono::steady_clock::now();
  Potential potential = make_potential(target);
  LmcConfig lmc_config = config.lmc;
  lmc_config.seed = config.seed ^ kLmcStream;

  LmcResult result = lmc_run(potential, lmc_config);
  MomentReport report = lmc_moment_check(result.samples, target);

  MethodArtifacts artifacts;
  artifacts.summary["n_samples"] = result.samples.rows();
  artifacts.summary["diverged_chains"] = result.diverged_chains;
  artifacts.summary["mode_masses"] =
      std::vector<double>(report.mode_masses.begin(), report.mode_masses.end());
  artifacts.summary["min_mode_mass"] = report.mode_masses.minCoeff();
  artifacts.summary["collapse_flag"] = report.mode_masses.minCoeff() <= 0.05;
  artifacts.summary["max_mean_abs_error"] = report.max_mean_abs_error;
  artifacts.summary["max_cov_abs_error"] = report.max_cov_abs_error;
  artifacts.summary["empirical_mean"] = std::vector<double>(
      report.empirical_mean.begin(), report.empirical_mean.end());
  if (emit_files)
    write_samples_csv(result.samples, result.chain_ids,
                      config.out_dir / "lmc_samples.csv");
  artifacts.seconds = seconds_since(t0);
  return artifacts;
}

nlohmann::json base_summary(const RunConfig& config) {
  nlohmann::json doc;
  doc["schema_version"] = 1;
  doc["config"] = config.to_json();
  doc["config_hash"] = config_hash(doc["config"]);
  doc["seed"] = config.seed;
  return doc;
}

int cmd_fit_mfvi(const RunConfig& config) {
  MixtureTarget target = config.resolve_target();
  nlohmann::json doc = base_summary(config);
  MethodArtifacts artifacts = run_mfvi_method(config, target, true);
  doc["methods"]["mfvi"] = artifacts.summary;
  doc["timing"] = {{"mfvi_seconds", artifacts.seconds}};
  write_json(doc, config.out_dir / "summary.json");
  std::cout << doc["methods"]["mfvi"]["kl"].dump() << "\n";
  return 0;
}

int cmd_fit_rovi(const RunConfig& config) {
  MixtureTarget target = config.resolve_target();
  nlohmann::json doc = base_summary(config);
  MethodArtifacts artifacts = run_rovi_method(config, target, true);
  doc["methods"]["rovi"] = artifacts.summary;
  doc["timing"] = {{"rovi_seconds", artifacts.seconds}};
  write_json(doc, config.out_dir / "summary.json");
  std::cout << doc["methods"]["rovi"]["kl"].dump() << "\n";
  return 0;
}

int cmd_sample_lmc(const RunConfig& config) {
  MixtureTarget target = config.resolve_target();
  nlohmann::json doc = base_summary(config);
  MethodArtifacts artifacts = run_lmc_method(config, target, true);
  doc["methods"]["lmc"] = artifacts.summary;
  doc["timing"] = {{"lmc_seconds", artifacts.seconds}};
  write_json(doc, config.out_dir / "summary.json");
  std::cout << doc["methods"]["lmc"].dump() << "\n";
  return 0;
}

int cmd_bounds(const RunConfig& config) {
  MixtureTarget target = config.resolve_target();
  nlohmann::json doc = bound_report_to_json(make_bound_report(target));
  std::cout << doc.dump(2) << "\n";
  return 0;
}

int cmd_experiment(const RunConfig& config) {
  MixtureTarget target = config.resolve_target();
  nlohmann::json doc = base_summary(config);

  MethodArtifacts mfvi = run_mfvi_method(config, target, true);
  MethodArtifacts rovi = run_rovi_method(config, target, true);
  MethodArtifacts lmc = run_lmc_method(config, target, true);
  doc["methods"]["mfvi"] = mfvi.summary;
  doc["methods"]["rovi"] = rovi.summary;
  doc["methods"]["lmc"] = lmc.summary;
  if (target.num_components() == 2)
    doc["bounds"] = bound_report_to_json(make_bound_report(target));
  if (target.dim() == 2)
    emit_contour(target_log_density_2d(target), ContourSpec{}, auto_extent(target),
                 config.out_dir / "contour_target.csv");
  doc["timing"] = {{"mfvi_seconds", mfvi.seconds},
                   {"rovi_seconds", rovi.seconds},
                   {"lmc_seconds", lmc.seconds}};
  write_json(doc, config.out_dir / "summary.json");
  std::cout << "summary written to " << (config.out_dir / "summary.json").string()
            << "\n";
  return 0;
}

int cmd_gradcheck(const RunConfig& config) {
  MixtureTarget target =
      config.preset || config.inline_target
          ? config.resolve_target()
          : find_preset("fig3c")->target;
  GradCheckReport report =
      run_gradcheck(target, 20, config.quadrature.gh_nodes, config.seed);
  std::cout << "gradcheck over " << report.points << " random points\n"
            << "  max rel error, coefficient gradient: " << report.max_rel_coeffs
            << "\n"
            << "  max rel error, shift gradient:       " << report.max_rel_shift
            << "\n"
            << "  max rel error, rotation direction:   " << report.max_rel_rotation
            << "\n";
  bool ok = report.max_rel_coeffs <= 1e-4 && report.max_rel_shift <= 1e-4 &&
            report.max_rel_rotation <= 1e-3;
  if (!ok) {
    std::cerr << "gradcheck FAILED\n";
    throw NumericalError("gradient check tolerances exceeded");
  }
  std::cout << "gradcheck OK\n";
  return 0;
}

}  // namespace

MixtureTarget RunConfig::resolve_target() const {
  if (preset) {
    auto found = find_preset(*preset);
    if (!found) throw InputError("unknown preset '" + *preset + "'");
    return found->target;
  }
  if (inline_target) return mixture_from_json(*inline_target);
  throw InputError("no target: pass --preset or a config with a target");
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json doc;
  if (preset) doc["target"] = {{"preset", *preset}};
  if (inline_target) doc["target"] = *inline_target;
  doc["dictionary"] = {{"alphas", dictionary.alphas},
                       {"betas", dictionary.betas},
                       {"lambda_floor", dictionary.lambda_floor},
                       {"tau", dictionary.gram_tau}};
  doc["quadrature"] = quadrature.to_string();
  doc["mfvi"] = {{"eta", mfvi.eta},
                 {"max_iters", mfvi.max_iters},
                 {"tol", mfvi.tol},
                 {"tol_window", mfvi.tol_window},
                 {"init_shift_std", mfvi.init_shift_std},
                 {"smoothness", mfvi.smoothness}};
  doc["rovi"] = {{"eta_mf", rovi.eta_mf},
                 {"eta_o", rovi.eta_o},
                 {"outer_iters", rovi.outer_iters},
                 {"inner_steps", rovi.inner_steps},
                 {"restarts", rovi.restarts},
                 {"tol", rovi.tol},
                 {"tol_window", rovi.tol_window},
                 {"init_shift_std", rovi.init_shift_std},
                 {"smoothness", rovi.smoothness}};
  doc["lmc"] = {{"step_size", lmc.step_size}, {"steps", lmc.steps},
                {"burn_in", lmc.burn_in},     {"thin", lmc.thin},
                {"chains", lmc.chains},       {"init_std", lmc.init_std}};
  doc["eval_samples"] = eval_samples;
  doc["seed"] = seed;
  return doc;
}

RunConfig parse_run_config(const nlohmann::json& doc) {
  RunConfig config;
  try {
    if (doc.contains("seed")) config.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("eval_samples"))
      config.eval_samples = doc["eval_samples"].get<long>();
    if (doc.contains("target")) {
      const auto& t = doc["target"];
      if (t.contains("preset"))
        config.preset = t["preset"].get<std::string>();
      else
        config.inline_target = t;
    }
    if (doc.contains("dictionary")) {
      const auto& j = doc["dictionary"];
      if (j.contains("alphas"))
        config.dictionary.alphas = j["alphas"].get<std::vector<double>>();
      if (j.contains("betas"))
        config.dictionary.betas = j["betas"].get<std::vector<double>>();
      if (j.contains("lambda_floor"))
        config.dictionary.lambda_floor = j["lambda_floor"].get<double>();
      if (j.contains("tau")) config.dictionary.gram_tau = j["tau"].get<double>();
    }
    if (doc.contains("quadrature"))
      config.quadrature = QuadratureSpec::parse(doc["quadrature"].get<std::string>());
    if (doc.contains("mfvi")) {
      const auto& j = doc["mfvi"];
      if (j.contains("eta")) config.mfvi.eta = j["eta"].get<double>();
      if (j.contains("max_iters")) config.mfvi.max_iters = j["max_iters"].get<long>();
      if (j.contains("tol")) config.mfvi.tol = j["tol"].get<double>();
      if (j.contains("tol_window"))
        config.mfvi.tol_window = j["tol_window"].get<int>();
      if (j.contains("init_shift_std"))
        config.mfvi.init_shift_std = j["init_shift_std"].get<double>();
      if (j.contains("smoothness"))
        config.mfvi.smoothness = j["smoothness"].get<double>();
    }
    if (doc.contains("rovi")) {
      const auto& j = doc["rovi"];
      if (j.contains("eta_mf")) config.rovi.eta_mf = j["eta_mf"].get<double>();
      if (j.contains("eta_o")) config.rovi.eta_o = j["eta_o"].get<double>();
      if (j.contains("outer_iters"))
        config.rovi.outer_iters = j["outer_iters"].get<int>();
      if (j.contains("inner_steps"))
        config.rovi.inner_steps = j["inner_steps"].get<int>();
      if (j.contains("restarts")) config.rovi.restarts = j["restarts"].get<int>();
      if (j.contains("tol")) config.rovi.tol = j["tol"].get<double>();
      if (j.contains("tol_window"))
        config.rovi.tol_window = j["tol_window"].get<int>();
      if (j.contains("init_shift_std"))
        config.rovi.init_shift_std = j["init_shift_std"].get<double>();
      if (j.contains("smoothness"))
        config.rovi.smoothness = j["smoothness"].get<double>();
    }
    if (doc.contains("lmc")) {
      const auto& j = doc["lmc"];
      if (j.contains("step_size")) config.lmc.step_size = j["step_size"].get<double>();
      if (j.contains("steps")) config.lmc.steps = j["steps"].get<long>();
      if (j.contains("burn_in")) config.lmc.burn_in = j["burn_in"].get<long>();
      if (j.contains("thin")) config.lmc.thin = j["thin"].get<long>();
      if (j.contains("chains")) config.lmc.chains = j["chains"].get<int>();
      if (j.contains("init_std")) config.lmc.init_std = j["init_std"].get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  return config;
}

int cli_main(const std::vector<std::string>& args) {
  CLI::App app{"Variational inference with rotated product measures: MFVI and "
               "RoVI fitters, a Langevin baseline, and mode-collapse bound "
               "calculators"};
  app.require_subcommand(1);

  std::string config_path, preset, quadrature, out_dir;
  std::uint64_t seed = 0;
  long iters = 0;
  int restarts = 0;
  double eta_mf = 0, eta_o = 0;
  bool have_seed = false;

  app.add_option("--config", config_path, "JSON run config; flags override it");
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--preset", preset, "built-in target name");
    cmd->add_option("--quadrature", quadrature, "mc:N or gh:nodes");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed, "master seed")->each([&](const std::string&) {
      have_seed = true;
    });
    cmd->add_option("--iters", iters, "MFVI iteration cap / RoVI outer rounds");
    cmd->add_option("--restarts", restarts, "RoVI restart count");
    cmd->add_option("--eta-mf", eta_mf, "MFVI step size");
    cmd->add_option("--eta-o", eta_o, "rotation step size");
  };

  CLI::App* fit_mfvi = app.add_subcommand("fit-mfvi", "product-measure fit");
  CLI::App* fit_rovi = app.add_subcommand("fit-rovi", "rotated product-measure fit");
  CLI::App* sample_lmc = app.add_subcommand("sample-lmc", "Langevin baseline");
  CLI::App* bounds = app.add_subcommand("bounds", "print the bound report");
  CLI::App* experiment =
      app.add_subcommand("experiment", "all three methods plus bounds and contours");
  CLI::App* gradcheck =
      app.add_subcommand("gradcheck", "finite-difference gradient audit");
  std::string experiment_preset;
  experiment->add_option("name", experiment_preset, "preset to run");
  for (CLI::App* cmd : {fit_mfvi, fit_rovi, sample_lmc, bounds, experiment, gradcheck})
    add_common(cmd);

  std::vector<const char*> argv;
  argv.push_back("rovi");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    RunConfig config;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw InputError("cannot read config file " + config_path);
      nlohmann::json doc;
      try {
        in >> doc;
      } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("config parse: ") + e.what());
      }
      config = parse_run_config(doc);
    }
    if (!preset.empty()) config.preset = preset;
    if (!experiment_preset.empty()) config.preset = experiment_preset;
    if (!quadrature.empty())
      config.quadrature = QuadratureSpec::parse(quadrature);
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (have_seed) config.seed = seed;
    if (iters > 0) {
      config.mfvi.max_iters = iters;
      config.rovi.outer_iters = static_cast<int>(iters);
    }
    if (restarts > 0) config.rovi.restarts = restarts;
    if (eta_mf > 0) {
      config.mfvi.eta = eta_mf;
      config.rovi.eta_mf = eta_mf;
    }
    if (eta_o > 0) config.rovi.eta_o = eta_o;

    if (fit_mfvi->parsed()) return cmd_fit_mfvi(config);
    if (fit_rovi->parsed()) return cmd_fit_rovi(config);
    if (sample_lmc->parsed()) return cmd_sample_lmc(config);
    if (bounds->parsed()) return cmd_bounds(config);
    if (experiment->parsed()) return cmd_experiment(config);
    if (gradcheck->parsed()) return cmd_gradcheck(config);
    throw InputError("no subcommand");
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace rovi
