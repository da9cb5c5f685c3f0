#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rovi/quadrature.hpp"

using namespace rovi;

TEST_CASE("univariate rule integrates normal moments exactly") {
  for (int n : {8, 40, 64}) {
    GaussHermiteRule rule = gauss_hermite_rule(n);
    CHECK(rule.weights.sum() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(rule.weights.minCoeff() > 0);
    double m1 = rule.weights.dot(rule.nodes);
    double m2 = rule.weights.dot(rule.nodes.array().square().matrix());
    double m4 = rule.weights.dot(rule.nodes.array().pow(4).matrix());
    CHECK(std::abs(m1) < 1e-13);
    CHECK(m2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m4 == doctest::Approx(3.0).epsilon(1e-12));
  }
}

TEST_CASE("tensor grid matches dimension and weight normalization") {
  QuadratureSet quad = QuadratureSet::gauss_hermite(2, 12);
  CHECK(quad.size() == 144);
  CHECK(quad.dim() == 2);
  CHECK(quad.weights.sum() == doctest::Approx(1.0).epsilon(1e-13));
  // E[x1^2 x2^2] = 1 for independent standard normals.
  double mixed = 0;
  for (long q = 0; q < quad.size(); ++q)
    mixed += quad.weights[q] * quad.points(q, 0) * quad.points(q, 0) *
             quad.points(q, 1) * quad.points(q, 1);
  CHECK(mixed == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gauss-hermite beyond two dimensions is rejected") {
  CHECK_THROWS_AS(QuadratureSet::gauss_hermite(3, 10), InputError);
}

TEST_CASE("monte carlo points are reproducible per seed") {
  QuadratureSet a = QuadratureSet::monte_carlo(3, 500, 7);
  QuadratureSet b = QuadratureSet::monte_carlo(3, 500, 7);
  QuadratureSet c = QuadratureSet::monte_carlo(3, 500, 8);
  CHECK((a.points - b.points).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.points - c.points).cwiseAbs().maxCoeff() > 0.0);
  CHECK(a.weights.sum() == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("quadrature spec round-trips") {
  QuadratureSpec mc = QuadratureSpec::parse("mc:2048");
  CHECK(mc.mode == QuadratureSet::Mode::MonteCarlo);
  CHECK(mc.mc_points == 2048);
  CHECK(mc.to_string() == "mc:2048");
  QuadratureSpec gh = QuadratureSpec::parse("gh:48");
  CHECK(gh.mode == QuadratureSet::Mode::GaussHermite);
  CHECK(gh.gh_nodes == 48);
  CHECK_THROWS_AS(QuadratureSpec::parse("trapezoid:9"), InputError);
  CHECK_THROWS_AS(QuadratureSpec::parse("mc:x"), InputError);
}
