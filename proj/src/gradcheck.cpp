#include "rovi/gradcheck.hpp"

#include <cmath>

namespace rovi {

namespace {

constexpr double kFdStep = 1e-5;

double mixed_relative(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric));
}

}  // namespace

Matrix expm_skew(const Matrix& omega) {
  if (omega.rows() != omega.cols()) throw InputError("expm_skew: must be square");
  if ((omega + omega.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw InputError("expm_skew: generator must be skew-symmetric");
  int squarings = 0;
  Matrix scaled = omega;
  while (scaled.norm() > 0.5) {
    scaled *= 0.5;
    ++squarings;
  }
  Matrix result = Matrix::Identity(omega.rows(), omega.cols());
  Matrix term = result;
  for (int k = 1; k <= 24; ++k) {
    term = (term * scaled / static_cast<double>(k)).eval();
    result += term;
  }
  for (int s = 0; s < squarings; ++s) result = (result * result).eval();
  return result;
}

GradCheckReport run_gradcheck(const MixtureTarget& target, int points,
                              int gh_nodes, std::uint64_t seed) {
  const int d = target.dim();
  const Dictionary dict = Dictionary::standard();
  const QuadratureSet quad = QuadratureSet::gauss_hermite(d, gh_nodes);
  const DictionaryTable table = build_table(dict, quad);
  const Potential potential = make_potential(target);

  Rng rng = make_rng(seed, 0x6D4Dull);
  std::uniform_real_distribution<double> unif(0.05, 0.5);
  std::uniform_real_distribution<double> unit(0.8, 1.6);
  std::normal_distribution<double> normal;

  GradCheckReport report;
  report.points = points;
  for (int p = 0; p < points; ++p) {
    SeparableMapParams params;
    params.coeffs.resize(dict.size(), d);
    for (int i = 0; i < d; ++i)
      for (int t = 0; t < dict.size(); ++t) params.coeffs(t, i) = unif(rng);
    params.coeffs.row(dict.identity_index()) =
        Vector::NullaryExpr(d, [&](Eigen::Index) { return unit(rng); }).transpose();
    params.shift = Vector::NullaryExpr(d, [&](Eigen::Index) { return normal(rng); });
    OrthogonalMatrix rotation = random_orthogonal(d, rng);

    auto objective = [&](const SeparableMapParams& q, const Matrix& o) {
      return kl_objective(table, q, o, potential).value;
    };

    ObjectiveGrads grads =
        eval_objective_grads(table, params, rotation.matrix(), potential);
    for (int i = 0; i < d; ++i) {
      for (int t = 0; t < dict.size(); ++t) {
        SeparableMapParams hi = params, lo = params;
        hi.coeffs(t, i) += kFdStep;
        lo.coeffs(t, i) -= kFdStep;
        double fd = (objective(hi, rotation.matrix()) - objective(lo, rotation.matrix())) /
                    (2.0 * kFdStep);
        report.max_rel_coeffs =
            std::max(report.max_rel_coeffs, mixed_relative(grads.grad_coeffs(t, i), fd));
      }
      SeparableMapParams hi = params, lo = params;
      hi.shift[i] += kFdStep;
      lo.shift[i] -= kFdStep;
      double fd = (objective(hi, rotation.matrix()) - objective(lo, rotation.matrix())) /
                  (2.0 * kFdStep);
      report.max_rel_shift =
          std::max(report.max_rel_shift, mixed_relative(grads.grad_shift[i], fd));
    }

    // Directional derivative along the geodesic O exp(t Omega).
    Matrix omega = Matrix::Zero(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = r + 1; c < d; ++c) {
        double g = normal(rng);
        omega(r, c) = -g;
        omega(c, r) = g;
      }
    Matrix tangent =
        tangent_project(rotation, rotation_grad(table, params, rotation, potential));
    double analytic = (tangent.array() * (rotation.matrix() * omega).array()).sum();
    Matrix fwd = rotation.matrix() * expm_skew(kFdStep * omega);
    Matrix bwd = rotation.matrix() * expm_skew(-kFdStep * omega);
    double fd = (objective(params, fwd) - objective(params, bwd)) / (2.0 * kFdStep);
    report.max_rel_rotation =
        std::max(report.max_rel_rotation, mixed_relative(analytic, fd));
  }
  return report;
}

}  // namespace rovi
