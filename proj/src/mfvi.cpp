#include "rovi/mfvi.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace rovi {

namespace {

KlEstimate assemble_estimate(const ObjectiveTerms& terms, const DictionaryTable& table,
                             const Potential& potential) {
  const double entropy = -0.5 * table.dim * (1.0 + std::log(2.0 * M_PI));
  KlEstimate est;
  double mean = terms.potential - terms.log_jacobian;
  est.value = mean + entropy + potential.log_normalizer.value_or(0.0);
  est.exact = potential.log_normalizer.has_value();
  if (table.monte_carlo && table.size > 1) {
    double var = std::max(0.0, terms.second_moment - mean * mean);
    est.std_error = std::sqrt(var / static_cast<double>(table.size));
  }
  return est;
}

}  // namespace

KlEstimate kl_objective(const DictionaryTable& table, const SeparableMapParams& params,
                        const Matrix& rotation, const Potential& potential) {
  return assemble_estimate(eval_objective(table, params, rotation, potential), table,
                           potential);
}

KlEstimate kl_objective(const DictionaryTable& table, const SeparableMapParams& params,
                        const OrthogonalMatrix& rotation, const Potential& potential) {
  return kl_objective(table, params, rotation.matrix(), potential);
}

Vector grad_v(const DictionaryTable& table, const SeparableMapParams& params,
              const Matrix& rotation, const Potential& potential) {
  return eval_objective_grads(table, params, rotation, potential).grad_shift;
}

Matrix grad_lambda(const DictionaryTable& table, const SeparableMapParams& params,
                   const Matrix& rotation, const Potential& potential) {
  return eval_objective_grads(table, params, rotation, potential).grad_coeffs;
}

void mfvi_step(const DictionaryTable& table, const Dictionary& dict,
               const GramMatrix& gram, MfviState& state,
               const OrthogonalMatrix& rotation, const Potential& potential) {
  if (state.eta <= 0 || state.smoothness <= 0)
    throw InputError("mfvi_step: step size and smoothness must be > 0");
  ObjectiveGrads grads =
      eval_objective_grads(table, state.params, rotation.matrix(), potential);
  state.kl_trace.push_back(
      assemble_estimate(grads.terms, table, potential).value);

  const double step = state.eta / state.smoothness;
  for (int i = 0; i < state.params.dim(); ++i) {
    Vector lam = state.params.coeffs.col(i) - step * gram.solve(grads.grad_coeffs.col(i));
    state.params.coeffs.col(i) =
        project_lambda(lam, gram, dict.identity_index(), dict.lambda_floor());
  }
  state.params.shift -= step * grads.grad_shift;
  ++state.iteration;
}

MfviFit run_mfvi(const DictionaryTable& table, const Dictionary& dict,
                 const GramMatrix& gram, const Potential& potential,
                 const MfviRunConfig& config) {
  if (config.max_iters < 1) throw InputError("run_mfvi: max_iters must be >= 1");

  MfviState state;
  state.params = identity_params(dict, table.dim);
  state.eta = config.eta;
  state.smoothness = config.smoothness;
  if (state.smoothness <= 0)
    throw InputError("run_mfvi: smoothness must be set (> 0)");
  if (config.init_shift_std > 0) {
    Rng rng = make_rng(config.seed, /*stream=*/0x1717u);
    std::normal_distribution<double> normal(0.0, config.init_shift_std);
    for (int i = 0; i < table.dim; ++i) state.params.shift[i] = normal(rng);
  }

  OrthogonalMatrix identity = OrthogonalMatrix::identity(table.dim);
  double best_kl = std::numeric_limits<double>::infinity();
  SeparableMapParams best_params = state.params;
  SeparableMapParams prev = state.params;
  long since_progress = 0;
  while (state.iteration < config.max_iters) {
    prev = state.params;
    mfvi_step(table, dict, gram, state, identity, potential);
    double kl = state.kl_trace.back();  // objective at `prev`
    if (kl < best_kl - config.tol) {
      since_progress = 0;
    } else {
      ++since_progress;
    }
    if (kl < best_kl) {
      best_kl = kl;
      best_params = prev;
    }
    if (since_progress >= config.tol_window) break;
  }

  // The trace holds pre-step values, so the final iterate is unscored; keep
  // it if it improves on the best recorded one.
  KlEstimate final_est =
      kl_objective(table, state.params, identity, potential);
  MfviFit fit;
  if (final_est.value < best_kl) {
    fit.params = state.params;
    fit.final_kl = final_est;
  } else {
    fit.params = best_params;
    fit.final_kl = kl_objective(table, best_params, identity, potential);
  }
  fit.kl_trace = std::move(state.kl_trace);
  fit.iterations = state.iteration;
  return fit;
}

double default_smoothness(const MixtureTarget& target) {
  double top = 0;
  for (const auto& comp : target.components) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(comp.precision());
    top = std::max(top, eig.eigenvalues().maxCoeff());
  }
  return top;
}

}  // namespace rovi
