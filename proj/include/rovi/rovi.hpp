#pragma once

#include "rovi/mfvi.hpp"
#include "rovi/theory.hpp"

#include <optional>
#include <string>

namespace rovi {

struct RoviOptions {
  DictionaryConfig dictionary;
  QuadratureSpec quadrature;
  double eta_mf = 0.001;
  double eta_o = 0.01;
  double smoothness = 0;  // <= 0: largest component-precision eigenvalue
  int outer_iters = 400;
  int inner_steps = 25;  // MFVI steps per rotation step; 1 = literal alternation
  int restarts = 8;
  double tol = 1e-8;
  int tol_window = 20;  // outer rounds without progress before stopping
  double init_shift_std = 0.1;
  std::uint64_t seed = 0;
};

struct RestartOutcome {
  std::vector<double> kl_trace;
  double final_kl = 0;
  bool failed = false;
  std::string error;
};

struct RoviResult {
  SeparableMapParams best_params;
  Matrix best_rotation;  // orthogonal; validated before storing
  int best_restart = -1;
  KlEstimate final_kl;
  std::vector<RestartOutcome> restarts;
  double seconds_mfvi = 0;      // accumulated across restarts
  double seconds_rotation = 0;  // accumulated across restarts
};

/// Alternating projected-gradient MFVI steps and Riemannian rotation steps
/// from multiple starts; returns the restart with the lowest final KL.
/// Restart 0 starts from O = I, the rest from Haar-random rotations; every
/// start uses the identity map with a N(0, init_shift_std^2) shift
/// perturbation. A restart that fails numerically is dropped with a warning
/// unless every restart fails.
RoviResult run_rovi(const MixtureTarget& target, const RoviOptions& options);

struct FitSummary {
  KlEstimate kl;              // fresh Monte Carlo points
  Vector mode_masses;         // per target component, argmax responsibility
  std::optional<std::pair<double, double>> quadrant;  // when a certificate exists
  bool quadrant_exact = false;  // true: marginal CDFs; false: empirical
  Vector marginal_mean;
  Vector marginal_var;
  long n_samples = 0;
};

/// Post-fit diagnostics on fresh Monte Carlo points: KL with standard
/// error, per-mode masses of pushforward samples, and marginal moments.
/// Quadrant masses use exact marginal CDFs when the fit is a pure product
/// measure (rotation = I) and empirical frequencies otherwise.
FitSummary fit_summary(const Dictionary& dict, const SeparableMapParams& params,
                       const Matrix& rotation, const MixtureTarget& target,
                       long n_eval, std::uint64_t seed);

}  // namespace rovi
