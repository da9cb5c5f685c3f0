#pragma once

#include "rovi/kernels.hpp"
#include "rovi/rotation.hpp"

namespace rovi {

/// KL divergence estimate. `exact` is false when the potential has no
/// log-normalizer, in which case the value is correct only up to that
/// additive constant. std_error is 0 for deterministic quadrature.
struct KlEstimate {
  double value = 0;
  double std_error = 0;
  bool exact = true;
};

/// KL((O T_theta)_# rho || pi) estimated on the quadrature set:
/// sum_q w_q [V(O T(x_q)) - log det DT(x_q)] + H(rho) + log Z with
/// H(rho) = -(d/2)(1 + log 2 pi).
KlEstimate kl_objective(const DictionaryTable& table, const SeparableMapParams& params,
                        const Matrix& rotation, const Potential& potential);
KlEstimate kl_objective(const DictionaryTable& table, const SeparableMapParams& params,
                        const OrthogonalMatrix& rotation, const Potential& potential);

/// Partial gradient in the shift: sum_q w_q O^T grad V(O T(x_q)).
Vector grad_v(const DictionaryTable& table, const SeparableMapParams& params,
              const Matrix& rotation, const Potential& potential);

/// Partial gradients in the coefficients: for entry T on coordinate i,
/// sum_q w_q [ (O^T grad V(O T(x_q)))_i T(x_qi) - T'(x_qi) / sum_T~
/// lambda_{i,T~} T~'(x_qi) ]. Signs are pinned by finite differences of
/// kl_objective.
Matrix grad_lambda(const DictionaryTable& table, const SeparableMapParams& params,
                   const Matrix& rotation, const Potential& potential);

struct MfviState {
  SeparableMapParams params;
  double eta = 1e-3;        // eta_MF
  double smoothness = 1.0;  // L
  long iteration = 0;
  std::vector<double> kl_trace;  // objective at each visited iterate
};

/// One projected-gradient update:
/// lambda_i <- proj_Q+(lambda_i - (eta/L) Q^{-1} grad_lambda_i),
/// v <- v - (eta/L) grad_v. Appends the pre-step objective to the trace.
void mfvi_step(const DictionaryTable& table, const Dictionary& dict,
               const GramMatrix& gram, MfviState& state,
               const OrthogonalMatrix& rotation, const Potential& potential);

struct MfviRunConfig {
  double eta = 1e-3;
  double smoothness = 0;  // <= 0: use largest component-precision eigenvalue
  long max_iters = 20000;
  double tol = 1e-8;      // smallest KL improvement counted as progress
  int tol_window = 50;    // iterations without progress before stopping
  double init_shift_std = 0.1;
  std::uint64_t seed = 0;
};

struct MfviFit {
  SeparableMapParams params;
  std::vector<double> kl_trace;
  KlEstimate final_kl;
  long iterations = 0;
};

/// Projected gradient descent with O = I from the identity map (shift
/// perturbed by N(0, init_shift_std^2)); returns the best iterate.
MfviFit run_mfvi(const DictionaryTable& table, const Dictionary& dict,
                 const GramMatrix& gram, const Potential& potential,
                 const MfviRunConfig& config);

/// Largest eigenvalue among the component precision matrices; the default
/// smoothness constant L for Gaussian mixture targets.
double default_smoothness(const MixtureTarget& target);

}  // namespace rovi
