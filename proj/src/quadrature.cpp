#include "rovi/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace rovi {

GaussHermiteRule gauss_hermite_rule(int n) {
  if (n < 1) throw InputError("gauss_hermite_rule: need at least one node");
  // Physicists' Hermite recurrence: off-diagonal beta_k = sqrt(k/2).
  Matrix jacobi = Matrix::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    double b = std::sqrt(0.5 * k);
    jacobi(k - 1, k) = b;
    jacobi(k, k - 1) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(jacobi);
  if (eig.info() != Eigen::Success)
    throw NumericalError("gauss_hermite_rule: eigensolver failed");

  GaussHermiteRule rule;
  // Rescale x -> sqrt(2) x to integrate against the standard normal; the
  // normalized weights are the squared first eigenvector components, which
  // sum to one exactly.
  rule.nodes = std::sqrt(2.0) * eig.eigenvalues();
  rule.weights = eig.eigenvectors().row(0).transpose().array().square();
  return rule;
}

QuadratureSet QuadratureSet::monte_carlo(int dim, long n, std::uint64_t seed) {
  if (dim < 1) throw InputError("QuadratureSet: dimension must be >= 1");
  if (n < 1) throw InputError("QuadratureSet: need at least one point");
  QuadratureSet quad;
  quad.mode = Mode::MonteCarlo;
  quad.seed = seed;
  quad.points.resize(n, dim);
  quad.weights = Vector::Constant(n, 1.0 / static_cast<double>(n));
  Rng rng = make_rng(seed, /*stream=*/0x71ADu);
  std::normal_distribution<double> normal;
  for (long r = 0; r < n; ++r)
    for (int c = 0; c < dim; ++c) quad.points(r, c) = normal(rng);
  return quad;
}

QuadratureSet QuadratureSet::gauss_hermite(int dim, int nodes_per_axis) {
  if (dim < 1 || dim > 2)
    throw InputError("QuadratureSet: Gauss-Hermite mode supports d <= 2");
  GaussHermiteRule rule = gauss_hermite_rule(nodes_per_axis);
  QuadratureSet quad;
  quad.mode = Mode::GaussHermite;
  int n = nodes_per_axis;
  if (dim == 1) {
    quad.points = rule.nodes;
    quad.weights = rule.weights;
  } else {
    quad.points.resize(static_cast<long>(n) * n, 2);
    quad.weights.resize(static_cast<long>(n) * n);
    long r = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j, ++r) {
        quad.points(r, 0) = rule.nodes[i];
        quad.points(r, 1) = rule.nodes[j];
        quad.weights[r] = rule.weights[i] * rule.weights[j];
      }
  }
  return quad;
}

QuadratureSet QuadratureSpec::build(int dim, std::uint64_t seed) const {
  if (mode == QuadratureSet::Mode::MonteCarlo)
    return QuadratureSet::monte_carlo(dim, mc_points, seed);
  return QuadratureSet::gauss_hermite(dim, gh_nodes);
}

QuadratureSpec QuadratureSpec::parse(const std::string& text) {
  QuadratureSpec spec;
  auto colon = text.find(':');
  std::string kind = text.substr(0, colon);
  std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  try {
    if (kind == "mc") {
      spec.mode = QuadratureSet::Mode::MonteCarlo;
      if (!arg.empty()) spec.mc_points = std::stol(arg);
    } else if (kind == "gh") {
      spec.mode = QuadratureSet::Mode::GaussHermite;
      if (!arg.empty()) spec.gh_nodes = std::stoi(arg);
    } else {
      throw InputError("quadrature spec must be mc:N or gh:nodes, got '" + text + "'");
    }
  } catch (const std::logic_error&) {
    throw InputError("invalid quadrature spec '" + text + "'");
  }
  if (spec.mc_points < 1 || spec.gh_nodes < 1)
    throw InputError("quadrature spec '" + text + "' must be positive");
  return spec;
}

std::string QuadratureSpec::to_string() const {
  if (mode == QuadratureSet::Mode::MonteCarlo)
    return "mc:" + std::to_string(mc_points);
  return "gh:" + std::to_string(gh_nodes);
}

}  // namespace rovi
