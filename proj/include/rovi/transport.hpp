#pragma once

#include "rovi/common.hpp"
#include "rovi/quadrature.hpp"

#include <Eigen/Cholesky>
#include <vector>

namespace rovi {

/// One univariate nondecreasing map from the dictionary.
struct DictionaryEntry {
  enum class Kind { Identity, SmoothStep };

  Kind kind = Kind::Identity;
  double alpha = 1.0;  // steepness (> 0), smooth-step only
  double beta = 0.0;   // center, smooth-step only

  double value(double x) const {
    return kind == Kind::Identity ? x : std::tanh(alpha * (x - beta));
  }
  /// Nonnegative everywhere: 1 for identity, alpha * sech^2(alpha(x-beta))
  /// for smooth steps.
  double slope(double x) const {
    if (kind == Kind::Identity) return 1.0;
    double t = std::tanh(alpha * (x - beta));
    return alpha * (1.0 - t * t);
  }
};

struct DictionaryConfig {
  std::vector<double> alphas{1.0, 2.0, 4.0};
  std::vector<double> betas{-2.0, -1.0, 0.0, 1.0, 2.0};
  double lambda_floor = 1e-3;
  double gram_tau = 1e-8;
};

/// The dictionary M of univariate OT maps: identity plus a tanh step grid.
/// Shared by every coordinate; nonnegative combinations stay nondecreasing.
class Dictionary {
 public:
  static Dictionary from_config(const DictionaryConfig& config);
  static Dictionary standard() { return from_config(DictionaryConfig{}); }

  int size() const { return static_cast<int>(entries_.size()); }
  const DictionaryEntry& entry(int i) const { return entries_[i]; }
  const std::vector<DictionaryEntry>& entries() const { return entries_; }
  /// Index of the identity map (always present).
  int identity_index() const { return 0; }
  double lambda_floor() const { return lambda_floor_; }
  double gram_tau() const { return gram_tau_; }

 private:
  std::vector<DictionaryEntry> entries_;
  double lambda_floor_ = 1e-3;
  double gram_tau_ = 1e-8;
};

/// theta = (lambda, v): nonnegative coefficients per coordinate block plus a
/// shift. Column i of `coeffs` is the block for coordinate i.
struct SeparableMapParams {
  Matrix coeffs;  // |M| x d, entries >= 0
  Vector shift;   // d

  int dim() const { return static_cast<int>(shift.size()); }
};

/// Identity transport map: unit identity coefficient, zero elsewhere.
SeparableMapParams identity_params(const Dictionary& dict, int dim);

void validate_params(const Dictionary& dict, const SeparableMapParams& params);

/// T_theta(x): coordinate i is v_i + sum_T lambda_{i,T} T(x_i).
Vector map_forward(const Dictionary& dict, const SeparableMapParams& params,
                   const Vector& x);

/// log det DT_theta(x) = sum_i log(sum_T lambda_{i,T} T'(x_i)); the Jacobian
/// of a separable map is diagonal.
double map_log_jacobian(const Dictionary& dict, const SeparableMapParams& params,
                        const Vector& x);

/// L2(rho) Gram matrix of the dictionary with a small diagonal
/// regularization tau, plus its cached Cholesky factor. One matrix serves
/// every coordinate block because the dictionary is shared.
struct GramMatrix {
  Matrix q;          // regularized: <T, T~> + tau on the diagonal
  Eigen::LLT<Matrix> chol;
  double tau = 0;

  int size() const { return static_cast<int>(q.rows()); }
  Vector solve(const Vector& rhs) const { return chol.solve(rhs); }
  double norm(const Vector& v) const { return std::sqrt(v.dot(q * v)); }
};

/// Entries by univariate Gauss-Hermite quadrature; requires at least
/// 2 |M| nodes. Throws InputError if the regularized matrix is still not
/// positive definite (dictionary too collinear).
GramMatrix build_gram(const Dictionary& dict, const GaussHermiteRule& rule);
GramMatrix build_gram(const Dictionary& dict);  // default 64-node rule

/// Projection of one coefficient block onto the nonnegative orthant in the
/// Q-norm: argmin_{mu >= 0} (mu - lambda)^T Q (mu - lambda), solved by
/// active-set NNLS to KKT residual <= 1e-10; the identity coefficient is
/// then raised to lambda_floor if below.
Vector project_lambda(const Vector& lambda, const GramMatrix& gram,
                      int identity_index, double lambda_floor);

/// project_lambda applied to every coordinate block of params.
void project_params(const Dictionary& dict, const GramMatrix& gram,
                    SeparableMapParams& params);

/// Rows T_theta(z) for z ~ rho = N(0, I_d).
Matrix pushforward_sample(const Dictionary& dict, const SeparableMapParams& params,
                          long n, Rng& rng);

/// x with T_i(x) = y, by bisection on the strictly increasing coordinate map.
double invert_coordinate(const Dictionary& dict, const SeparableMapParams& params,
                         int coord, double y);

}  // namespace rovi
