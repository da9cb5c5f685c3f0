#pragma once

#include "rovi/common.hpp"
#include "rovi/target.hpp"

#include <vector>

namespace rovi {

struct LmcConfig {
  double step_size = 0.05;  // h
  long steps = 20000;
  long burn_in = 2000;
  long thin = 10;
  int chains = 64;
  double init_std = 2.0;  // overdispersed N(0, init_std^2 I) start
  std::uint64_t seed = 0;
};

struct LmcResult {
  Matrix samples;               // post burn-in, thinned, all chains stacked
  std::vector<int> chain_ids;   // chain index per sample row
  int diverged_chains = 0;
  long steps_per_chain = 0;
};

/// Unadjusted Langevin: x <- x - h grad V(x) + sqrt(2h) xi. A chain whose
/// iterate exceeds |x| > 1e6 is aborted and dropped; if every chain
/// diverges the step size is unusable and a NumericalError is raised.
LmcResult lmc_run(const Potential& potential, const LmcConfig& config);

struct MomentReport {
  Vector empirical_mean;
  Matrix empirical_cov;
  Vector analytic_mean;
  Matrix analytic_cov;
  Vector mode_masses;  // fraction of samples claimed by each component
  double max_mean_abs_error = 0;
  double max_cov_abs_error = 0;
};

/// Empirical moments and responsibility-based mode masses against the
/// analytic mixture moments.
MomentReport lmc_moment_check(const Matrix& samples, const MixtureTarget& target);

}  // namespace rovi
