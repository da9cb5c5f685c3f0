#pragma once

#include "rovi/target.hpp"
#include "rovi/transport.hpp"

#include <functional>

namespace rovi::testing {

/// Centered finite-difference gradient of a scalar function.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f,
                          const Vector& x, double h = 1e-5) {
  Vector g(x.size());
  for (long i = 0; i < x.size(); ++i) {
    Vector hi = x, lo = x;
    hi[i] += h;
    lo[i] -= h;
    g[i] = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

inline Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

inline Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

inline MixtureTarget standard_normal_target(int dim) {
  Vector w(1);
  w << 1.0;
  return MixtureTarget(w, {GaussianComponent(Vector::Zero(dim),
                                             Matrix::Identity(dim, dim))});
}

/// Equal-weight pair at +-(m, ..., m) with unit covariances.
inline MixtureTarget symmetric_pair_target(int dim, double m) {
  Vector w(2);
  w << 0.5, 0.5;
  Vector m1 = Vector::Constant(dim, m);
  Matrix eye = Matrix::Identity(dim, dim);
  return MixtureTarget(w, {GaussianComponent(-m1, eye), GaussianComponent(m1, eye)});
}

/// Random valid map parameters with entries bounded away from zero so
/// two-sided finite differences stay feasible.
inline SeparableMapParams random_params(const Dictionary& dict, int dim, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.05, 0.5);
  std::uniform_real_distribution<double> unit(0.8, 1.6);
  std::normal_distribution<double> normal;
  SeparableMapParams params;
  params.coeffs.resize(dict.size(), dim);
  for (int i = 0; i < dim; ++i)
    for (int t = 0; t < dict.size(); ++t) params.coeffs(t, i) = unif(rng);
  for (int i = 0; i < dim; ++i)
    params.coeffs(dict.identity_index(), i) = unit(rng);
  params.shift = Vector::NullaryExpr(dim, [&](Eigen::Index) { return normal(rng); });
  return params;
}

}  // namespace rovi::testing
