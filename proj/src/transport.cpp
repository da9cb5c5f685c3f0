#include "rovi/transport.hpp"

#include <cmath>
#include <string>

namespace rovi {

namespace {

constexpr double kKktTol = 1e-10;

void check_point_dim(const SeparableMapParams& params, const Vector& x,
                     const char* op) {
  if (x.size() != params.shift.size())
    throw InputError(std::string(op) + ": point dimension mismatch");
}

}  // namespace

Dictionary Dictionary::from_config(const DictionaryConfig& config) {
  if (config.lambda_floor <= 0)
    throw InputError("Dictionary: lambda_floor must be > 0");
  Dictionary dict;
  dict.lambda_floor_ = config.lambda_floor;
  dict.gram_tau_ = config.gram_tau;
  dict.entries_.push_back(DictionaryEntry{DictionaryEntry::Kind::Identity, 1.0, 0.0});
  for (double alpha : config.alphas) {
    if (alpha <= 0) throw InputError("Dictionary: steepness must be > 0");
    for (double beta : config.betas)
      dict.entries_.push_back(
          DictionaryEntry{DictionaryEntry::Kind::SmoothStep, alpha, beta});
  }
  return dict;
}

SeparableMapParams identity_params(const Dictionary& dict, int dim) {
  if (dim < 1) throw InputError("identity_params: dimension must be >= 1");
  SeparableMapParams params;
  params.coeffs = Matrix::Zero(dict.size(), dim);
  params.coeffs.row(dict.identity_index()).setOnes();
  params.shift = Vector::Zero(dim);
  return params;
}

void validate_params(const Dictionary& dict, const SeparableMapParams& params) {
  if (params.coeffs.rows() != dict.size())
    throw InputError("map params: coefficient block size does not match dictionary");
  if (params.coeffs.cols() != params.shift.size())
    throw InputError("map params: coefficient/shift dimension mismatch");
  if (params.coeffs.minCoeff() < 0)
    throw InputError("map params: coefficients must be nonnegative");
}

Vector map_forward(const Dictionary& dict, const SeparableMapParams& params,
                   const Vector& x) {
  validate_params(dict, params);
  check_point_dim(params, x, "map_forward");
  Vector out = params.shift;
  for (int i = 0; i < params.dim(); ++i)
    for (int t = 0; t < dict.size(); ++t) {
      double c = params.coeffs(t, i);
      if (c != 0) out[i] += c * dict.entry(t).value(x[i]);
    }
  return out;
}

double map_log_jacobian(const Dictionary& dict, const SeparableMapParams& params,
                        const Vector& x) {
  validate_params(dict, params);
  check_point_dim(params, x, "map_log_jacobian");
  double sum = 0;
  for (int i = 0; i < params.dim(); ++i) {
    double deriv = 0;
    for (int t = 0; t < dict.size(); ++t) {
      double c = params.coeffs(t, i);
      if (c != 0) deriv += c * dict.entry(t).slope(x[i]);
    }
    if (!(deriv > 0))
      throw NumericalError("map_log_jacobian: singular map (coordinate " +
                           std::to_string(i) + " has derivative <= 0)");
    sum += std::log(deriv);
  }
  return sum;
}

GramMatrix build_gram(const Dictionary& dict, const GaussHermiteRule& rule) {
  const int m = dict.size();
  if (rule.nodes.size() < 2L * m)
    throw InputError("build_gram: need at least 2|M| quadrature nodes, got " +
                     std::to_string(rule.nodes.size()));
  Matrix vals(rule.nodes.size(), m);
  for (long q = 0; q < rule.nodes.size(); ++q)
    for (int t = 0; t < m; ++t) vals(q, t) = dict.entry(t).value(rule.nodes[q]);
  Matrix q = vals.transpose() * rule.weights.asDiagonal() * vals;
  q = 0.5 * (q + q.transpose());  // kill quadrature roundoff asymmetry
  q.diagonal().array() += dict.gram_tau();

  GramMatrix gram;
  gram.q = q;
  gram.tau = dict.gram_tau();
  gram.chol.compute(q);
  if (gram.chol.info() != Eigen::Success ||
      gram.chol.matrixLLT().diagonal().minCoeff() <= 0)
    throw InputError("build_gram: Gram matrix not positive definite after "
                     "regularization; dictionary too collinear");
  return gram;
}

GramMatrix build_gram(const Dictionary& dict) {
  int nodes = std::max(64, 2 * dict.size());
  return build_gram(dict, gauss_hermite_rule(nodes));
}

Vector project_lambda(const Vector& lambda, const GramMatrix& gram,
                      int identity_index, double lambda_floor) {
  const int n = static_cast<int>(lambda.size());
  if (n != gram.size()) throw InputError("project_lambda: size mismatch");
  if (identity_index < 0 || identity_index >= n)
    throw InputError("project_lambda: bad identity index");

  const Vector target = gram.q * lambda;  // Q lambda, fixed rhs
  const double tol = kKktTol * std::max(1.0, target.cwiseAbs().maxCoeff());

  Vector mu = Vector::Zero(n);
  std::vector<bool> free(n, false);
  int n_free = 0;

  // Lawson-Hanson active-set iteration on min (mu-lambda)^T Q (mu-lambda).
  // Negative gradient (up to factor 2): w = Q(lambda - mu).
  Vector w = target;
  const int max_outer = 10 * n;
  for (int outer = 0; outer <= max_outer; ++outer) {
    int pick = -1;
    double best = tol;
    for (int i = 0; i < n; ++i)
      if (!free[i] && w[i] > best) {
        best = w[i];
        pick = i;
      }
    if (pick < 0) break;  // KKT satisfied
    if (outer == max_outer)
      throw NumericalError("project_lambda: active-set iteration cap exceeded");
    free[pick] = true;
    ++n_free;

    // Re-solve on the free set; backtrack while the solution leaves the
    // nonnegative orthant.
    for (int inner = 0; inner <= max_outer; ++inner) {
      std::vector<int> idx;
      idx.reserve(n_free);
      for (int i = 0; i < n; ++i)
        if (free[i]) idx.push_back(i);
      Matrix qff(idx.size(), idx.size());
      Vector rhs(idx.size());
      for (size_t a = 0; a < idx.size(); ++a) {
        rhs[static_cast<long>(a)] = target[idx[a]];
        for (size_t b = 0; b < idx.size(); ++b)
          qff(static_cast<long>(a), static_cast<long>(b)) = gram.q(idx[a], idx[b]);
      }
      Vector z = Eigen::LDLT<Matrix>(qff).solve(rhs);

      double step = 1.0;
      int blocker = -1;
      for (size_t a = 0; a < idx.size(); ++a) {
        if (z[static_cast<long>(a)] > 0) continue;
        double denom = mu[idx[a]] - z[static_cast<long>(a)];
        double candidate = denom > 0 ? mu[idx[a]] / denom : 0.0;
        if (candidate < step) {
          step = candidate;
          blocker = idx[a];
        }
      }
      if (blocker < 0) {
        for (size_t a = 0; a < idx.size(); ++a) mu[idx[a]] = z[static_cast<long>(a)];
        break;
      }
      for (size_t a = 0; a < idx.size(); ++a) {
        long i = idx[a];
        mu[i] += step * (z[static_cast<long>(a)] - mu[i]);
      }
      mu[blocker] = 0;
      free[blocker] = false;
      --n_free;
      if (inner == max_outer)
        throw NumericalError("project_lambda: backtracking cap exceeded");
    }
    w = target - gram.q * mu;
  }

  if (mu[identity_index] < lambda_floor) mu[identity_index] = lambda_floor;
  return mu;
}

void project_params(const Dictionary& dict, const GramMatrix& gram,
                    SeparableMapParams& params) {
  for (int i = 0; i < params.dim(); ++i)
    params.coeffs.col(i) = project_lambda(params.coeffs.col(i), gram,
                                          dict.identity_index(), dict.lambda_floor());
}

Matrix pushforward_sample(const Dictionary& dict, const SeparableMapParams& params,
                          long n, Rng& rng) {
  validate_params(dict, params);
  if (n < 1) throw InputError("pushforward_sample: need n >= 1");
  const int d = params.dim();
  Matrix out(n, d);
  std::normal_distribution<double> normal;
  Vector z(d);
  for (long r = 0; r < n; ++r) {
    for (int c = 0; c < d; ++c) z[c] = normal(rng);
    out.row(r) = map_forward(dict, params, z).transpose();
  }
  return out;
}

double invert_coordinate(const Dictionary& dict, const SeparableMapParams& params,
                         int coord, double y) {
  validate_params(dict, params);
  if (coord < 0 || coord >= params.dim())
    throw InputError("invert_coordinate: coordinate out of range");
  auto eval = [&](double x) {
    double v = params.shift[coord];
    for (int t = 0; t < dict.size(); ++t) {
      double c = params.coeffs(t, coord);
      if (c != 0) v += c * dict.entry(t).value(x);
    }
    return v;
  };
  double lo = -1.0, hi = 1.0;
  for (int grow = 0; grow < 200 && eval(lo) > y; ++grow) lo *= 2;
  for (int grow = 0; grow < 200 && eval(hi) < y; ++grow) hi *= 2;
  if (eval(lo) > y || eval(hi) < y)
    throw NumericalError("invert_coordinate: bracketing failed");
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo)); ++it) {
    double mid = 0.5 * (lo + hi);
    (eval(mid) < y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace rovi
