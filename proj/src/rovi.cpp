#include "rovi/rovi.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>

namespace rovi {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct RestartProduct {
  RestartOutcome outcome;
  SeparableMapParams params;
  Matrix rotation;
  double seconds_mfvi = 0;
  double seconds_rotation = 0;
};

RestartProduct run_restart(int index, const Dictionary& dict, const GramMatrix& gram,
                           const DictionaryTable& table, const Potential& potential,
                           const RoviOptions& options, double smoothness) {
  RestartProduct product;
  const int d = table.dim;
  Rng rng = make_rng(options.seed, 0xA110ull + static_cast<std::uint64_t>(index));

  OrthogonalMatrix rotation =
      index == 0 ? OrthogonalMatrix::identity(d) : random_orthogonal(d, rng);
  MfviState state;
  state.params = identity_params(dict, d);
  std::normal_distribution<double> normal(0.0, options.init_shift_std);
  if (options.init_shift_std > 0)
    for (int i = 0; i < d; ++i) state.params.shift[i] = normal(rng);
  state.eta = options.eta_mf;
  state.smoothness = smoothness;

  double best = std::numeric_limits<double>::infinity();
  int since_progress = 0;
  for (int outer = 0; outer < options.outer_iters; ++outer) {
    auto t0 = Clock::now();
    for (int k = 0; k < options.inner_steps; ++k)
      mfvi_step(table, dict, gram, state, rotation, potential);
    product.seconds_mfvi += seconds_since(t0);

    t0 = Clock::now();
    rotation = rotation_step(table, state.params, rotation, potential, options.eta_o);
    product.seconds_rotation += seconds_since(t0);

    double kl = state.kl_trace.back();
    if (!std::isfinite(kl))
      throw NumericalError("run_rovi: objective became non-finite");
    if (kl < best - options.tol) {
      best = kl;
      since_progress = 0;
    } else {
      best = std::min(best, kl);
      ++since_progress;
    }
    if (since_progress >= options.tol_window) break;
  }

  product.outcome.kl_trace = std::move(state.kl_trace);
  product.outcome.final_kl =
      kl_objective(table, state.params, rotation, potential).value;
  if (!std::isfinite(product.outcome.final_kl))
    throw NumericalError("run_rovi: final objective is non-finite");
  product.params = std::move(state.params);
  product.rotation = rotation.matrix();
  return product;
}

}  // namespace

RoviResult run_rovi(const MixtureTarget& target, const RoviOptions& options) {
  if (options.eta_mf <= 0 || options.eta_o <= 0)
    throw InputError("run_rovi: step sizes must be > 0");
  if (options.restarts < 1) throw InputError("run_rovi: need >= 1 restart");
  if (options.outer_iters < 1 || options.inner_steps < 1)
    throw InputError("run_rovi: iteration caps must be >= 1");

  const Dictionary dict = Dictionary::from_config(options.dictionary);
  const GramMatrix gram = build_gram(dict);
  const QuadratureSet quad = options.quadrature.build(target.dim(), options.seed);
  const DictionaryTable table = build_table(dict, quad);
  const Potential potential = make_potential(target);
  const double smoothness =
      options.smoothness > 0 ? options.smoothness : default_smoothness(target);

  std::vector<RestartProduct> products(options.restarts);
#pragma omp parallel for schedule(dynamic) num_threads(parallel::threads())
  for (int r = 0; r < options.restarts; ++r) {
    try {
      products[r] =
          run_restart(r, dict, gram, table, potential, options, smoothness);
    } catch (const std::exception& e) {
      products[r].outcome.failed = true;
      products[r].outcome.error = e.what();
    }
  }

  RoviResult result;
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < options.restarts; ++r) {
    auto& product = products[r];
    result.seconds_mfvi += product.seconds_mfvi;
    result.seconds_rotation += product.seconds_rotation;
    if (product.outcome.failed) {
      std::cerr << "run_rovi: restart " << r << " dropped: "
                << product.outcome.error << "\n";
    } else if (product.outcome.final_kl < best) {
      best = product.outcome.final_kl;
      result.best_restart = r;
      result.best_params = product.params;
      result.best_rotation = product.rotation;
    }
    result.restarts.push_back(std::move(product.outcome));
  }
  if (result.best_restart < 0)
    throw NumericalError("run_rovi: every restart failed");

  result.final_kl =
      kl_objective(table, result.best_params, result.best_rotation, potential);
  return result;
}

FitSummary fit_summary(const Dictionary& dict, const SeparableMapParams& params,
                       const Matrix& rotation, const MixtureTarget& target,
                       long n_eval, std::uint64_t seed) {
  if (n_eval < 1) throw InputError("fit_summary: need n_eval >= 1");
  const int d = target.dim();
  OrthogonalMatrix orth(rotation);
  const Potential potential = make_potential(target);

  FitSummary summary;
  QuadratureSet fresh =
      QuadratureSet::monte_carlo(d, n_eval, derive_seed(seed, 0xE7A1ull));
  DictionaryTable table = build_table(dict, fresh);
  summary.kl = kl_objective(table, params, orth, potential);

  Rng rng = make_rng(seed, 0x5A3Bull);
  Matrix pushed = pushforward_sample(dict, params, n_eval, rng) * rotation.transpose();
  summary.n_samples = n_eval;
  summary.marginal_mean = pushed.colwise().mean().transpose();
  Matrix centered = pushed.rowwise() - summary.marginal_mean.transpose();
  summary.marginal_var =
      centered.array().square().colwise().sum().transpose() /
      static_cast<double>(n_eval - 1);

  Vector counts = Vector::Zero(target.num_components());
  Vector x(d);
  for (long r = 0; r < n_eval; ++r) {
    x = pushed.row(r).transpose();
    Vector resp = mixture_responsibilities(target, x);
    int top = 0;
    resp.maxCoeff(&top);
    counts[top] += 1;
  }
  summary.mode_masses = counts / static_cast<double>(n_eval);

  try {
    SeparationCertificate cert = gaussian_product_separation(target);
    bool is_identity =
        (rotation - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() == 0;
    if (is_identity) {
      // Pure product fit: exact quadrant masses through the marginal CDFs
      // Phi(T_i^{-1}(b)).
      MarginalCdf cdf = [&](int coord, double b) {
        return normal_cdf(invert_coordinate(dict, params, coord, b));
      };
      summary.quadrant = quadrant_mass(cdf, cert);
      summary.quadrant_exact = true;
    } else {
      summary.quadrant = quadrant_mass(pushed, cert);
      summary.quadrant_exact = false;
    }
  } catch (const InputError&) {
    summary.quadrant.reset();
  }
  return summary;
}

}  // namespace rovi
