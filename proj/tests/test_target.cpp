#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rovi/target.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace rovi;
using namespace rovi::testing;

namespace {

/// Direct summation without log-sum-exp; only valid where nothing
/// under/overflows.
double naive_potential(const MixtureTarget& target, const Vector& x) {
  double sum = 0;
  for (int k = 0; k < target.num_components(); ++k) {
    const auto& c = target.components[k];
    Vector z = c.chol_lower().triangularView<Eigen::Lower>().solve(x - c.mean());
    sum += target.weights[k] * std::exp(-0.5 * c.log_det_covariance()) *
           std::exp(-0.5 * z.squaredNorm());
  }
  return -std::log(sum);
}

MixtureTarget fig3c_target() {
  Vector w(2);
  w << 0.5, 0.5;
  return MixtureTarget(
      w, {GaussianComponent(vec2(-2.5, -1.5), Matrix::Identity(2, 2)),
          GaussianComponent(vec2(2.0, 1.0), Matrix::Identity(2, 2))});
}

}  // namespace

TEST_CASE("component construction validates its inputs") {
  CHECK_THROWS_AS(GaussianComponent(vec2(0, 0), mat2(1, 0.5, 0.2, 1)), InputError);
  CHECK_THROWS_AS(GaussianComponent(vec2(0, 0), mat2(1, 2, 2, 1)), InputError);
  CHECK_THROWS_AS(GaussianComponent(vec2(0, 0), mat2(1e-12, 0, 0, 1)), InputError);
  CHECK_THROWS_AS(GaussianComponent(vec2(0, 0), Matrix::Identity(3, 3)), InputError);

  GaussianComponent ok(vec2(1, 2), mat2(2, 0.5, 0.5, 1));
  CHECK(ok.log_det_covariance() == doctest::Approx(std::log(1.75)));
  CHECK((ok.precision() * ok.covariance() - Matrix::Identity(2, 2))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
}

TEST_CASE("mixture construction validates weights") {
  Vector w(2);
  w << 0.7, 0.2;
  std::vector<GaussianComponent> comps{
      GaussianComponent(vec2(0, 0), Matrix::Identity(2, 2)),
      GaussianComponent(vec2(1, 1), Matrix::Identity(2, 2))};
  CHECK_THROWS_AS(MixtureTarget(w, comps), InputError);
  w << 1.1, -0.1;
  CHECK_THROWS_AS(MixtureTarget(w, comps), InputError);
}

TEST_CASE("potential of a single standard component") {
  MixtureTarget target = standard_normal_target(2);
  CHECK(mixture_potential(target, vec2(0, 0)) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(mixture_potential(target, vec2(1, 2)) == doctest::Approx(2.5));
  CHECK_THROWS_AS(mixture_potential(target, Vector::Zero(3)), InputError);
}

TEST_CASE("potential at a mode of the m=3 symmetric pair") {
  MixtureTarget target = symmetric_pair_target(2, 3.0);
  // Benign point: direct summation is the oracle here.
  double naive = naive_potential(target, vec2(3, 3));
  double lse = mixture_potential(target, vec2(3, 3));
  CHECK(lse == doctest::Approx(naive).epsilon(1e-12));
  CHECK(lse == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("equal-weight symmetric mixture has an even potential") {
  MixtureTarget target = symmetric_pair_target(2, 3.0);
  Rng rng = make_rng(11);
  std::normal_distribution<double> normal(0.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    Vector x = vec2(normal(rng), normal(rng));
    CHECK(mixture_potential(target, x) ==
          doctest::Approx(mixture_potential(target, -x)).epsilon(1e-12));
  }
}

TEST_CASE("log-sum-exp path agrees with direct summation where it is safe") {
  MixtureTarget target = fig3c_target();
  Rng rng = make_rng(12);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    Vector x = vec2(normal(rng), normal(rng));
    CHECK(std::abs(mixture_potential(target, x) - naive_potential(target, x)) < 1e-10);
  }
  // Far point where direct summation underflows and log-sum-exp must not.
  Vector far = vec2(40, 40);
  CHECK(std::isfinite(mixture_potential(target, far)));
  CHECK(std::isinf(naive_potential(target, far)));
}

TEST_CASE("potential is invariant under component permutation") {
  Vector w(2);
  w << 0.3, 0.7;
  GaussianComponent a(vec2(-1, 0), mat2(1.5, 0.3, 0.3, 0.8));
  GaussianComponent b(vec2(2, 1), Matrix::Identity(2, 2));
  MixtureTarget fwd(w, {a, b});
  Vector w_rev(2);
  w_rev << 0.7, 0.3;
  MixtureTarget rev(w_rev, {b, a});
  Rng rng = make_rng(13);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    Vector x = vec2(normal(rng), normal(rng));
    CHECK(mixture_potential(fwd, x) ==
          doctest::Approx(mixture_potential(rev, x)).epsilon(1e-13));
  }
}

TEST_CASE("gradient of a single standard component is x") {
  MixtureTarget target = standard_normal_target(3);
  Vector x(3);
  x << 0.4, -1.2, 2.0;
  CHECK((mixture_grad(target, x) - x).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("gradient vanishes at the symmetry point of the m=3 pair") {
  MixtureTarget target = symmetric_pair_target(2, 3.0);
  CHECK(mixture_grad(target, vec2(0, 0)).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("gradient matches centered finite differences") {
  MixtureTarget target = fig3c_target();
  auto f = [&](const Vector& x) { return mixture_potential(target, x); };
  Vector probe = vec2(1, 1);
  Vector fd = fd_gradient(f, probe);
  CHECK((mixture_grad(target, probe) - fd).cwiseAbs().maxCoeff() < 1e-8);

  // 100 random probes, relative error <= 1e-4 (h = 1e-5).
  Rng rng = make_rng(14);
  std::normal_distribution<double> normal(0.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    Vector x = vec2(normal(rng), normal(rng));
    Vector analytic = mixture_grad(target, x);
    Vector numeric = fd_gradient(f, x);
    double rel = (analytic - numeric).norm() / std::max(1.0, numeric.norm());
    CHECK(rel < 1e-4);
  }
}

TEST_CASE("responsibilities stay finite when one component dominates") {
  MixtureTarget target = symmetric_pair_target(2, 8.0);
  Vector x = vec2(8, 8);
  Vector r = mixture_responsibilities(target, x);
  CHECK(r.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r[1] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(mixture_grad(target, x).allFinite());
}

TEST_CASE("log density of the standard normal at the origin") {
  MixtureTarget target = standard_normal_target(1);
  Vector x(1);
  x << 0.0;
  CHECK(mixture_log_density(target, x) ==
        doctest::Approx(-0.9189385332046727).epsilon(1e-12));
}

TEST_CASE("log density equals -potential - log normalizer") {
  MixtureTarget target = fig3c_target();
  double log_z = target.log_normalizer();
  CHECK(log_z == doctest::Approx(std::log(2 * M_PI)));
  Vector x = vec2(0.3, -0.7);
  CHECK(mixture_log_density(target, x) ==
        doctest::Approx(-mixture_potential(target, x) - log_z).epsilon(1e-13));
}

TEST_CASE("density integrates to one on a fine grid") {
  MixtureTarget target = fig3c_target();
  const double extent = 9.0;
  const int n = 360;
  const double h = 2 * extent / n;
  double sum = 0;
  Vector x(2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      x << -extent + (i + 0.5) * h, -extent + (j + 0.5) * h;
      sum += std::exp(mixture_log_density(target, x)) * h * h;
    }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("sampling moments and degenerate weights") {
  MixtureTarget target = standard_normal_target(2);
  Rng rng = make_rng(15);
  Matrix samples = sample_mixture(target, 100000, rng);
  CHECK(samples.col(0).mean() == doctest::Approx(0.0).epsilon(0.02));
  CHECK(samples.col(1).mean() == doctest::Approx(0.0).epsilon(0.02));

  Vector w(2);
  w << 1.0, 0.0;
  MixtureTarget degenerate(
      w, {GaussianComponent(vec2(5, 5), Matrix::Identity(2, 2)),
          GaussianComponent(vec2(-5, -5), Matrix::Identity(2, 2))});
  Matrix d = sample_mixture(degenerate, 2000, rng);
  CHECK(d.col(0).minCoeff() > 0.0);  // all draws near +(5,5)
}

TEST_CASE("third-quadrant mass of the m=3 pair matches the CDF oracle") {
  // 0.5 Phi(3)^2 + 0.5 (1-Phi(3))^2, from the complementary error function.
  double phi3 = 0.5 * std::erfc(-3.0 / std::sqrt(2.0));
  double expected = 0.5 * phi3 * phi3 + 0.5 * (1 - phi3) * (1 - phi3);
  CHECK(expected == doctest::Approx(0.49865).epsilon(1e-4));

  MixtureTarget target = symmetric_pair_target(2, 3.0);
  Rng rng = make_rng(16);
  Matrix samples = sample_mixture(target, 100000, rng);
  long count = 0;
  for (long r = 0; r < samples.rows(); ++r)
    if (samples(r, 0) < 0 && samples(r, 1) < 0) ++count;
  CHECK(count / 1e5 == doctest::Approx(expected).epsilon(0.01));
}

TEST_CASE("json round trip and validation") {
  auto doc = nlohmann::json::parse(R"({
    "weights": [0.4, 0.6],
    "means": [[-2.5, 0.0], [2.5, 0.0]],
    "covariances": [[[1.0, 0.0], [0.0, 1.0]], [[1.0, 0.0], [0.0, 1.0]]]
  })");
  MixtureTarget target = mixture_from_json(doc);
  CHECK(target.weights[0] == 0.4);
  CHECK(target.components[1].mean()[0] == 2.5);
  MixtureTarget again = mixture_from_json(mixture_to_json(target));
  CHECK(again.components[0].mean()[0] == -2.5);

  auto bad = doc;
  bad["weights"] = {0.4};
  CHECK_THROWS_AS(mixture_from_json(bad), InputError);
  bad = doc;
  bad["covariances"][0][0][1] = 0.5;  // asymmetric
  CHECK_THROWS_AS(mixture_from_json(bad), InputError);
}

TEST_CASE("rotated potential is the pushforward chain rule") {
  MixtureTarget target = fig3c_target();
  Potential pot = make_potential(target);
  Matrix o(2, 2);
  double c = std::cos(0.3), s = std::sin(0.3);
  o << c, -s, s, c;
  Potential rotated = rotate_potential(pot, o);
  Vector x = vec2(0.7, -0.2);
  CHECK(rotated.value(x) == doctest::Approx(pot.value(o * x)).epsilon(1e-14));
  Vector expected = o.transpose() * pot.grad(o * x);
  CHECK((rotated.grad(x) - expected).cwiseAbs().maxCoeff() < 1e-13);
  Vector g(2);
  CHECK(rotated.value_and_grad(x, g) == doctest::Approx(rotated.value(x)));
  CHECK((g - expected).cwiseAbs().maxCoeff() < 1e-13);
}
