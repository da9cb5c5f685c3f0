#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rovi/gradcheck.hpp"
#include "rovi/mfvi.hpp"
#include "rovi/rotation.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace rovi;
using namespace rovi::testing;

namespace {

MixtureTarget fig3c_target() {
  Vector w(2);
  w << 0.5, 0.5;
  return MixtureTarget(
      w, {GaussianComponent(vec2(-2.5, -1.5), Matrix::Identity(2, 2)),
          GaussianComponent(vec2(2.0, 1.0), Matrix::Identity(2, 2))});
}

}  // namespace

TEST_CASE("orthogonality validation") {
  CHECK_NOTHROW(OrthogonalMatrix(Matrix::Identity(3, 3)));
  Matrix skewed = Matrix::Identity(2, 2);
  skewed(0, 1) = 1e-6;
  CHECK_THROWS_AS(OrthogonalMatrix(skewed), InputError);
}

TEST_CASE("tangent projection: isotropic gradients vanish, tangents are fixed") {
  Rng rng = make_rng(51);
  OrthogonalMatrix o = random_orthogonal(3, rng);

  // Isotropic case: G proportional to O projects to zero.
  CHECK(tangent_project(o, 2.5 * o.matrix()).cwiseAbs().maxCoeff() < 1e-12);

  // Tangent vectors O Omega are fixed points.
  Matrix omega = Matrix::Zero(3, 3);
  omega(0, 1) = 0.7;
  omega(1, 0) = -0.7;
  omega(1, 2) = -0.3;
  omega(2, 1) = 0.3;
  Matrix tangent = o.matrix() * omega;
  CHECK((tangent_project(o, tangent) - tangent).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("both projection formulas agree and produce skew generators") {
  Rng rng = make_rng(52);
  std::normal_distribution<double> normal;
  for (int rep = 0; rep < 10; ++rep) {
    OrthogonalMatrix o = random_orthogonal(3, rng);
    Matrix g(3, 3);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) g(r, c) = normal(rng);
    Matrix projected = tangent_project(o, g);
    Matrix sym = 0.5 * (o.matrix().transpose() * g + g.transpose() * o.matrix());
    Matrix alternative = g - o.matrix() * sym;
    CHECK((projected - alternative).cwiseAbs().maxCoeff() < 1e-12);
    Matrix generator = o.matrix().transpose() * projected;
    CHECK((generator + generator.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("qr retraction: fixed points, sign convention, first order") {
  Rng rng = make_rng(53);
  OrthogonalMatrix o = random_orthogonal(2, rng);
  CHECK((qr_retract(o.matrix()).matrix() - o.matrix()).cwiseAbs().maxCoeff() < 1e-13);

  Matrix diag = Matrix::Zero(2, 2);
  diag(0, 0) = 2;
  diag(1, 1) = 3;
  CHECK((qr_retract(diag).matrix() - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <
        1e-14);

  CHECK_THROWS_AS(qr_retract(Matrix::Zero(2, 2)), NumericalError);

  // |retract(O - eta G~) - (O - eta G~)| = O(eta^2) along tangent directions.
  Matrix omega = Matrix::Zero(2, 2);
  omega(0, 1) = -1.0;
  omega(1, 0) = 1.0;
  Matrix tangent = o.matrix() * omega;
  double prev_ratio = 0;
  for (double eta : {1e-2, 1e-3, 1e-4}) {
    Matrix moved = o.matrix() - eta * tangent;
    double defect = (qr_retract(moved).matrix() - moved).norm();
    double ratio = defect / (eta * eta);
    if (prev_ratio > 0) CHECK(ratio == doctest::Approx(prev_ratio).epsilon(0.1));
    prev_ratio = ratio;
    CHECK(defect < 2.0 * eta * eta);
  }
}

TEST_CASE("rotation gradient of an isotropic quadratic is the rotation itself") {
  Dictionary dict = Dictionary::standard();
  Potential pot = make_potential(standard_normal_target(2));
  DictionaryTable gh = build_table(dict, QuadratureSet::gauss_hermite(2, 40));
  SeparableMapParams params = identity_params(dict, 2);

  Rng rng = make_rng(54);
  OrthogonalMatrix o = random_orthogonal(2, rng);
  Matrix g = rotation_grad(gh, params, o, pot);
  CHECK((g - o.matrix()).cwiseAbs().maxCoeff() < 1e-12);

  // Consequence: the tangent-projected gradient vanishes and a step is a
  // no-op for any step size.
  CHECK(tangent_project(o, g).cwiseAbs().maxCoeff() < 1e-12);
  OrthogonalMatrix stepped = rotation_step(gh, params, o, pot, 0.5);
  CHECK((stepped.matrix() - o.matrix()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("one-dimensional rotation gradient is a plain quadrature sum") {
  Dictionary dict = Dictionary::standard();
  MixtureTarget target = standard_normal_target(1);
  Potential pot = make_potential(target);
  QuadratureSet quad = QuadratureSet::gauss_hermite(1, 32);
  DictionaryTable table = build_table(dict, quad);
  Rng rng = make_rng(55);
  SeparableMapParams params = random_params(dict, 1, rng);

  Matrix g = rotation_grad(table, params, OrthogonalMatrix::identity(1), pot);
  double expected = 0;
  Vector x(1);
  for (long q = 0; q < quad.size(); ++q) {
    x[0] = quad.points(q, 0);
    double mapped = map_forward(dict, params, x)[0];
    expected += quad.weights[q] * mapped * mapped;  // V'(y) = y
  }
  CHECK(g(0, 0) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("directional derivative along geodesics matches the projection") {
  Dictionary dict = Dictionary::standard();
  MixtureTarget target = fig3c_target();
  Potential pot = make_potential(target);
  DictionaryTable gh = build_table(dict, QuadratureSet::gauss_hermite(2, 40));
  Rng rng = make_rng(56);

  for (int rep = 0; rep < 5; ++rep) {
    SeparableMapParams params = random_params(dict, 2, rng);
    OrthogonalMatrix o = random_orthogonal(2, rng);
    Matrix omega = Matrix::Zero(2, 2);
    std::normal_distribution<double> normal;
    double gen = normal(rng);
    omega(0, 1) = -gen;
    omega(1, 0) = gen;

    Matrix tangent = tangent_project(o, rotation_grad(gh, params, o, pot));
    double analytic = (tangent.array() * (o.matrix() * omega).array()).sum();
    const double t = 1e-5;
    double fwd = kl_objective(gh, params,
                              Matrix(o.matrix() * expm_skew(t * omega)), pot).value;
    double bwd = kl_objective(gh, params,
                              Matrix(o.matrix() * expm_skew(-t * omega)), pot).value;
    double numeric = (fwd - bwd) / (2 * t);
    CHECK(std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric)) < 1e-3);
  }
}

TEST_CASE("rotation steps descend on a fitted map and stay orthogonal") {
  Dictionary dict = Dictionary::standard();
  GramMatrix gram = build_gram(dict);
  MixtureTarget target = fig3c_target();
  Potential pot = make_potential(target);
  DictionaryTable gh = build_table(dict, QuadratureSet::gauss_hermite(2, 40));

  Rng rng = make_rng(57);
  OrthogonalMatrix o = random_orthogonal(2, rng);
  MfviState state;
  state.params = identity_params(dict, 2);
  state.eta = 0.001;
  state.smoothness = default_smoothness(target);
  for (int i = 0; i < 200; ++i) mfvi_step(gh, dict, gram, state, o, pot);

  double before = kl_objective(gh, state.params, o, pot).value;
  OrthogonalMatrix next = o;
  for (int i = 0; i < 25; ++i) {
    next = rotation_step(gh, state.params, next, pot, 0.01);
    CHECK(next.orthogonality_defect() <= 1e-10);
  }
  double after = kl_objective(gh, state.params, next, pot).value;
  CHECK(after <= before + 1e-10);
}

TEST_CASE("random orthogonal matrices satisfy the invariants") {
  Rng rng = make_rng(58);
  for (int rep = 0; rep < 20; ++rep) {
    OrthogonalMatrix o = random_orthogonal(4, rng);
    CHECK(o.orthogonality_defect() <= 1e-10);
  }
  // d = 1: the positive-diagonal convention forces (1).
  for (int rep = 0; rep < 10; ++rep)
    CHECK(random_orthogonal(1, rng).matrix()(0, 0) == 1.0);
}

TEST_CASE("first-column angle is uniform on the circle") {
  Rng rng = make_rng(59);
  const int n = 10000, bins = 16;
  std::vector<int> counts(bins, 0);
  for (int i = 0; i < n; ++i) {
    OrthogonalMatrix o = random_orthogonal(2, rng);
    double angle = std::atan2(o.matrix()(1, 0), o.matrix()(0, 0));  // [-pi, pi)
    int bin = static_cast<int>((angle + M_PI) / (2 * M_PI) * bins);
    counts[std::min(bin, bins - 1)] += 1;
  }
  double expected = static_cast<double>(n) / bins;
  double chi2 = 0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // chi-square critical value, 15 dof, level 0.01.
  CHECK(chi2 < 30.578);
}
