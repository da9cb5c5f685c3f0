#pragma once

#include "rovi/common.hpp"

namespace rovi {

/// Univariate Gauss-Hermite rule rescaled to N(0,1):
/// E[f(X)] ~= sum_i weights[i] * f(nodes[i]), weights sum to 1.
struct GaussHermiteRule {
  Vector nodes;
  Vector weights;
};

/// Nodes/weights via Golub-Welsch on the Hermite Jacobi matrix.
GaussHermiteRule gauss_hermite_rule(int n);

/// Fixed reference points and weights under rho = N(0, I_d). All
/// expectations of one run share a single set (common random numbers), so
/// the objective is a deterministic function of the variational parameters.
struct QuadratureSet {
  enum class Mode { MonteCarlo, GaussHermite };

  Mode mode = Mode::MonteCarlo;
  Matrix points;   // n x d
  Vector weights;  // length n, nonnegative, sums to 1
  std::uint64_t seed = 0;

  int dim() const { return static_cast<int>(points.cols()); }
  long size() const { return points.rows(); }
  bool is_monte_carlo() const { return mode == Mode::MonteCarlo; }

  static QuadratureSet monte_carlo(int dim, long n, std::uint64_t seed);
  /// Tensorized rule; supported for dim <= 2 only.
  static QuadratureSet gauss_hermite(int dim, int nodes_per_axis);
};

/// Quadrature choice as it appears in run configs and on the CLI
/// (--quadrature mc:N | gh:nodes).
struct QuadratureSpec {
  QuadratureSet::Mode mode = QuadratureSet::Mode::MonteCarlo;
  long mc_points = 4096;
  int gh_nodes = 40;

  QuadratureSet build(int dim, std::uint64_t seed) const;
  static QuadratureSpec parse(const std::string& text);
  std::string to_string() const;
};

}  // namespace rovi
