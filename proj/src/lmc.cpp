#include "rovi/lmc.hpp"

#include <cmath>

namespace rovi {

namespace {

constexpr double kDivergenceRadius = 1e6;

struct ChainOutput {
  Matrix draws;
  bool diverged = false;
};

ChainOutput run_chain(const Potential& potential, const LmcConfig& config,
                      int chain_index) {
  const int d = potential.dim;
  const long kept = (config.steps - config.burn_in + config.thin - 1) / config.thin;
  ChainOutput out;
  out.draws.resize(kept, d);

  Rng rng = make_rng(config.seed, 0xC0DEull + static_cast<std::uint64_t>(chain_index));
  std::normal_distribution<double> normal;
  Vector x(d);
  for (int i = 0; i < d; ++i) x[i] = config.init_std * normal(rng);

  const double h = config.step_size;
  const double noise_scale = std::sqrt(2.0 * h);
  long written = 0;
  Vector g(d);
  for (long step = 0; step < config.steps; ++step) {
    if (potential.value_and_grad) {
      potential.value_and_grad(x, g);
    } else {
      g = potential.grad(x);
    }
    for (int i = 0; i < d; ++i) x[i] += -h * g[i] + noise_scale * normal(rng);
    if (!x.allFinite() || x.norm() > kDivergenceRadius) {
      out.diverged = true;
      break;
    }
    if (step >= config.burn_in && (step - config.burn_in) % config.thin == 0)
      out.draws.row(written++) = x.transpose();
  }
  out.draws.conservativeResize(written, d);
  return out;
}

}  // namespace

LmcResult lmc_run(const Potential& potential, const LmcConfig& config) {
  if (config.step_size <= 0) throw InputError("lmc_run: step size must be > 0");
  if (config.chains < 1) throw InputError("lmc_run: need >= 1 chain");
  if (config.thin < 1) throw InputError("lmc_run: thinning stride must be >= 1");
  if (config.burn_in < 0 || config.burn_in >= config.steps)
    throw InputError("lmc_run: burn-in must lie in [0, steps)");
  if (!potential.grad && !potential.value_and_grad)
    throw InputError("lmc_run: potential has no gradient");

  std::vector<ChainOutput> outputs(config.chains);
#pragma omp parallel for schedule(dynamic) num_threads(parallel::threads())
  for (int c = 0; c < config.chains; ++c)
    outputs[c] = run_chain(potential, config, c);

  long total = 0;
  int diverged = 0;
  for (const auto& o : outputs) {
    if (o.diverged)
      ++diverged;
    else
      total += o.draws.rows();
  }
  if (diverged == config.chains)
    throw NumericalError("lmc_run: every chain diverged; reduce the step size");
  if (total == 0)
    throw InputError("lmc_run: no samples remain after burn-in and thinning");

  LmcResult result;
  result.samples.resize(total, potential.dim);
  result.chain_ids.reserve(total);
  result.diverged_chains = diverged;
  result.steps_per_chain = config.steps;
  long row = 0;
  for (int c = 0; c < config.chains; ++c) {
    if (outputs[c].diverged) continue;
    result.samples.middleRows(row, outputs[c].draws.rows()) = outputs[c].draws;
    for (long i = 0; i < outputs[c].draws.rows(); ++i) result.chain_ids.push_back(c);
    row += outputs[c].draws.rows();
  }
  return result;
}

MomentReport lmc_moment_check(const Matrix& samples, const MixtureTarget& target) {
  if (samples.rows() == 0) throw InputError("lmc_moment_check: empty sample set");
  if (samples.cols() != target.dim())
    throw InputError("lmc_moment_check: dimension mismatch");
  const long n = samples.rows();
  const int d = target.dim();

  MomentReport report;
  report.empirical_mean = samples.colwise().mean().transpose();
  Matrix centered = samples.rowwise() - report.empirical_mean.transpose();
  report.empirical_cov =
      centered.transpose() * centered / static_cast<double>(n - 1);
  report.analytic_mean = target.mixture_mean();
  report.analytic_cov = target.mixture_covariance();

  Vector counts = Vector::Zero(target.num_components());
  Vector x(d);
  for (long r = 0; r < n; ++r) {
    x = samples.row(r).transpose();
    Vector resp = mixture_responsibilities(target, x);
    int top = 0;
    resp.maxCoeff(&top);
    counts[top] += 1;
  }
  report.mode_masses = counts / static_cast<double>(n);

  report.max_mean_abs_error =
      (report.empirical_mean - report.analytic_mean).cwiseAbs().maxCoeff();
  report.max_cov_abs_error =
      (report.empirical_cov - report.analytic_cov).cwiseAbs().maxCoeff();
  return report;
}

}  // namespace rovi
