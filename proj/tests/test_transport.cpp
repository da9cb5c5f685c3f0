#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rovi/transport.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace rovi;
using namespace rovi::testing;

namespace {

Dictionary tiny_dictionary() {
  DictionaryConfig config;
  config.alphas = {1.0};
  config.betas = {0.0};
  return Dictionary::from_config(config);  // {identity, tanh(x)}
}

/// Simpson-rule oracle for E[f(X)], X ~ N(0,1), on [-12, 12].
double simpson_expectation(const std::function<double(double)>& f) {
  const int n = 24000;
  const double a = -12.0, b = 12.0, h = (b - a) / n;
  auto integrand = [&](double x) {
    return f(x) * std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  };
  double sum = integrand(a) + integrand(b);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * integrand(a + i * h);
  return sum * h / 3.0;
}

}  // namespace

TEST_CASE("standard dictionary layout") {
  Dictionary dict = Dictionary::standard();
  CHECK(dict.size() == 16);
  CHECK(dict.entry(0).kind == DictionaryEntry::Kind::Identity);
  CHECK(dict.identity_index() == 0);
  // Every entry is nondecreasing: nonnegative slope on a wide probe grid.
  for (int t = 0; t < dict.size(); ++t)
    for (double x = -6; x <= 6; x += 0.25) CHECK(dict.entry(t).slope(x) >= 0);
}

TEST_CASE("map_forward identity, affine, and tanh cases") {
  Dictionary dict = tiny_dictionary();
  SeparableMapParams params = identity_params(dict, 2);
  Vector x = vec2(0.3, -1.2);
  CHECK((map_forward(dict, params, x) - x).cwiseAbs().maxCoeff() == 0.0);

  params.coeffs(0, 0) = 2.0;
  params.coeffs(0, 1) = 2.0;
  params.shift = vec2(1, 1);
  Vector affine = map_forward(dict, params, x);
  CHECK(affine[0] == doctest::Approx(2 * 0.3 + 1).epsilon(1e-15));
  CHECK(affine[1] == doctest::Approx(2 * -1.2 + 1).epsilon(1e-15));

  SeparableMapParams mix = identity_params(dict, 1);
  mix.coeffs(1, 0) = 1.0;
  Vector one(1);
  one << 1.0;
  // 1 + tanh(1), high-precision oracle value.
  CHECK(map_forward(dict, mix, one)[0] ==
        doctest::Approx(1.7615941559557649).epsilon(1e-14));

  mix.coeffs(1, 0) = -0.5;
  CHECK_THROWS_AS(map_forward(dict, mix, one), InputError);
}

TEST_CASE("map_log_jacobian closed forms") {
  Dictionary dict = tiny_dictionary();
  SeparableMapParams params = identity_params(dict, 3);
  Vector x(3);
  x << 0.5, -2.0, 1.0;
  CHECK(map_log_jacobian(dict, params, x) == 0.0);

  params.coeffs.row(0).setConstant(2.0);
  CHECK(map_log_jacobian(dict, params, x) ==
        doctest::Approx(3 * std::log(2.0)).epsilon(1e-14));

  SeparableMapParams mix = identity_params(dict, 1);
  mix.coeffs(1, 0) = 1.0;
  Vector zero(1);
  zero << 0.0;
  // slope = 1 + sech^2(0) = 2.
  CHECK(map_log_jacobian(dict, mix, zero) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("log jacobian matches the finite-difference jacobian determinant") {
  Dictionary dict = Dictionary::standard();
  Rng rng = make_rng(21);
  std::normal_distribution<double> normal;
  for (int rep = 0; rep < 10; ++rep) {
    SeparableMapParams params = random_params(dict, 2, rng);
    Vector x = vec2(normal(rng), normal(rng));
    const double h = 1e-6;
    double det = 1.0;
    for (int i = 0; i < 2; ++i) {
      Vector hi = x, lo = x;
      hi[i] += h;
      lo[i] -= h;
      det *= (map_forward(dict, params, hi)[i] - map_forward(dict, params, lo)[i]) /
             (2 * h);
    }
    CHECK(map_log_jacobian(dict, params, x) ==
          doctest::Approx(std::log(det)).epsilon(1e-5));
  }
}

TEST_CASE("strict monotonicity per coordinate") {
  Dictionary dict = Dictionary::standard();
  Rng rng = make_rng(22);
  std::normal_distribution<double> normal(0.0, 2.0);
  std::uniform_real_distribution<double> gap(1e-6, 1.0);
  SeparableMapParams params = random_params(dict, 2, rng);
  for (int rep = 0; rep < 1000; ++rep) {
    Vector x = vec2(normal(rng), normal(rng));
    Vector y = x + vec2(gap(rng), gap(rng));
    Vector fx = map_forward(dict, params, x);
    Vector fy = map_forward(dict, params, y);
    CHECK(fx[0] < fy[0]);
    CHECK(fx[1] < fy[1]);
  }
}

TEST_CASE("gram matrix entries against quadrature oracles") {
  Dictionary dict = tiny_dictionary();
  GramMatrix gram = build_gram(dict, gauss_hermite_rule(64));
  // <identity, identity> = E[x^2] = 1 (plus the tau regularization).
  CHECK(gram.q(0, 0) == doctest::Approx(1.0 + dict.gram_tau()).epsilon(1e-12));
  // <identity, tanh> from an independent Simpson oracle.
  double oracle = simpson_expectation([](double x) { return x * std::tanh(x); });
  CHECK(oracle == doctest::Approx(0.6057055096).epsilon(1e-9));
  CHECK(gram.q(0, 1) == doctest::Approx(oracle).epsilon(1e-9));
  // <tanh, tanh> < 1 for every steepness.
  Dictionary steep = Dictionary::standard();
  GramMatrix full = build_gram(steep);
  for (int t = 1; t < steep.size(); ++t) CHECK(full.q(t, t) < 1.0);
  // Symmetric positive definite: Cholesky succeeded inside build_gram.
  CHECK((full.q - full.q.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gram regularization and collinearity") {
  DictionaryConfig dup;
  dup.alphas = {1.0, 1.0};  // duplicated entries: exactly singular Gram
  dup.betas = {0.0};
  dup.gram_tau = 0.0;
  CHECK_THROWS_AS(build_gram(Dictionary::from_config(dup)), InputError);
  dup.gram_tau = 1e-8;
  CHECK_NOTHROW(build_gram(Dictionary::from_config(dup)));

  CHECK_THROWS_AS(build_gram(Dictionary::standard(), gauss_hermite_rule(8)),
                  InputError);
}

TEST_CASE("projection: interior points and euclidean clipping") {
  Dictionary dict = tiny_dictionary();
  GramMatrix eye;
  eye.q = Matrix::Identity(2, 2);
  eye.chol.compute(eye.q);

  Vector lam(2);
  lam << 0.5, 0.2;
  Vector proj = project_lambda(lam, eye, 0, 1e-3);
  CHECK((proj - lam).cwiseAbs().maxCoeff() < 1e-12);

  lam << -0.4, 0.7;
  proj = project_lambda(lam, eye, 1, 1e-3);  // identity floor on index 1
  CHECK(proj[0] == 0.0);
  CHECK(proj[1] == doctest::Approx(0.7));
}

TEST_CASE("projection solves the correlated case to KKT optimality") {
  GramMatrix gram;
  gram.q = mat2(2, 1, 1, 2);
  gram.chol.compute(gram.q);
  Vector lam = vec2(-1, 1);
  Vector proj = project_lambda(lam, gram, 0, 1e-12);  // negligible floor

  // Two-stage brute-force grid over the nonnegative quadrant, final
  // resolution 1e-4.
  auto objective = [&](double a, double b) {
    Vector mu = vec2(a, b);
    return (mu - lam).dot(gram.q * (mu - lam));
  };
  double best_a = 0, best_b = 0, best = 1e300;
  for (double a = 0; a <= 2.0; a += 0.02)
    for (double b = 0; b <= 2.0; b += 0.02)
      if (objective(a, b) < best) {
        best = objective(a, b);
        best_a = a;
        best_b = b;
      }
  for (double a = std::max(0.0, best_a - 0.02); a <= best_a + 0.02; a += 1e-4)
    for (double b = std::max(0.0, best_b - 0.02); b <= best_b + 0.02; b += 1e-4)
      if (objective(a, b) < best) {
        best = objective(a, b);
      }
  CHECK(objective(proj[0], proj[1]) <= best + 1e-7);

  // KKT residual: zero gradient on free coordinates, nonnegative on active.
  Vector grad = 2 * gram.q * (proj - lam);
  for (int i = 0; i < 2; ++i) {
    if (proj[i] > 0)
      CHECK(std::abs(grad[i]) <= 1e-10);
    else
      CHECK(grad[i] >= -1e-10);
  }
}

TEST_CASE("projection is idempotent, floors the identity, and contracts") {
  Dictionary dict = Dictionary::standard();
  GramMatrix gram = build_gram(dict);
  Rng rng = make_rng(23);
  std::uniform_real_distribution<double> unif(-1.0, 2.0);
  for (int rep = 0; rep < 50; ++rep) {
    Vector a(dict.size()), b(dict.size());
    for (int t = 0; t < dict.size(); ++t) {
      a[t] = unif(rng);
      b[t] = unif(rng);
    }
    Vector pa = project_lambda(a, gram, 0, dict.lambda_floor());
    Vector pb = project_lambda(b, gram, 0, dict.lambda_floor());
    CHECK(pa.minCoeff() >= 0.0);
    CHECK(pa[0] >= dict.lambda_floor());
    Vector paa = project_lambda(pa, gram, 0, dict.lambda_floor());
    CHECK((paa - pa).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(gram.norm(pa - pb) <= gram.norm(a - b) * (1 + 1e-9) + 1e-9);
  }
}

TEST_CASE("pushforward sampling moments and monotone coupling") {
  Dictionary dict = tiny_dictionary();
  SeparableMapParams params = identity_params(dict, 2);
  Rng rng = make_rng(24);
  const long n = 40000;
  Matrix identity_draws = pushforward_sample(dict, params, n, rng);
  CHECK(std::abs(identity_draws.col(0).mean()) < 3.0 / std::sqrt(double(n)));

  params.coeffs.row(0).setConstant(1.5);
  params.shift = vec2(2, 2);
  Matrix affine_draws = pushforward_sample(dict, params, n, rng);
  Vector mean = affine_draws.colwise().mean().transpose();
  double var = (affine_draws.col(0).array() - mean[0]).square().sum() / (n - 1);
  CHECK(mean[0] == doctest::Approx(2.0).epsilon(0.03));
  CHECK(var == doctest::Approx(1.5 * 1.5).epsilon(0.05));

  // Monotone map: sorting inputs and outputs yields the same permutation,
  // i.e. output order mirrors input order coordinatewise.
  SeparableMapParams steep = identity_params(Dictionary::standard(), 1);
  steep.coeffs(5, 0) = 3.0;
  Rng rng2 = make_rng(25);
  std::normal_distribution<double> normal;
  std::vector<std::pair<double, double>> pairs;
  Vector z(1);
  for (int i = 0; i < 500; ++i) {
    z[0] = normal(rng2);
    pairs.emplace_back(z[0], map_forward(Dictionary::standard(), steep, z)[0]);
  }
  std::sort(pairs.begin(), pairs.end());
  for (size_t i = 1; i < pairs.size(); ++i)
    CHECK(pairs[i - 1].second < pairs[i].second);
}

TEST_CASE("coordinate inversion round-trips") {
  Dictionary dict = Dictionary::standard();
  Rng rng = make_rng(26);
  SeparableMapParams params = random_params(dict, 2, rng);
  std::normal_distribution<double> normal;
  for (int rep = 0; rep < 20; ++rep) {
    Vector x = vec2(normal(rng), normal(rng));
    Vector y = map_forward(dict, params, x);
    for (int i = 0; i < 2; ++i)
      CHECK(invert_coordinate(dict, params, i, y[i]) ==
            doctest::Approx(x[i]).epsilon(1e-9));
  }
}
