#pragma once

#include "rovi/mfvi.hpp"

namespace rovi {

/// Matrix exponential of a skew-symmetric generator by scaling and
/// squaring; diagnostic use only (geodesic finite differences).
Matrix expm_skew(const Matrix& omega);

struct GradCheckReport {
  double max_rel_coeffs = 0;    // grad_lambda vs centered differences
  double max_rel_shift = 0;     // grad_v vs centered differences
  double max_rel_rotation = 0;  // <G~, O Omega>_F vs geodesic differences
  int points = 0;
};

/// Centered-difference audit of both partial gradients and the Riemannian
/// directional derivative at `points` random valid (theta, O) pairs, using
/// deterministic Gauss-Hermite quadrature.
GradCheckReport run_gradcheck(const MixtureTarget& target, int points,
                              int gh_nodes, std::uint64_t seed);

}  // namespace rovi
