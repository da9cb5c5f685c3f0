#pragma once

#include "rovi/common.hpp"

#include <functional>
#include <optional>
#include <vector>

#include "json.hpp"

namespace rovi {

/// One Gaussian mixture component with cached factorizations.
class GaussianComponent {
 public:
  /// Validates symmetry (1e-12) and positive definiteness; near-singular
  /// covariances (Cholesky pivot < 1e-10) are rejected, not regularized.
  GaussianComponent(Vector mean, Matrix covariance);

  const Vector& mean() const { return mean_; }
  const Matrix& covariance() const { return covariance_; }
  const Matrix& chol_lower() const { return chol_lower_; }
  const Matrix& precision() const { return precision_; }
  double log_det_covariance() const { return log_det_; }
  int dim() const { return static_cast<int>(mean_.size()); }

  /// -1/2 |L^{-1}(x-m)|^2 - 1/2 log det(Sigma); no (2 pi)^{-d/2} factor.
  double unnormalized_log_density(const Vector& x) const;

 private:
  Vector mean_;
  Matrix covariance_;
  Matrix chol_lower_;
  Matrix precision_;
  double log_det_ = 0;
};

/// Finite Gaussian mixture pi = sum_k w_k N(m_k, Sigma_k).
struct MixtureTarget {
  Vector weights;
  std::vector<GaussianComponent> components;

  MixtureTarget(Vector weights, std::vector<GaussianComponent> components);

  int dim() const { return components.front().dim(); }
  int num_components() const { return static_cast<int>(components.size()); }

  /// Exact log-normalizer of exp(-V): with the component |Sigma|^{-1/2}
  /// factors kept inside V, log Z = (d/2) log(2 pi) for every mixture.
  double log_normalizer() const;

  Vector mixture_mean() const;
  Matrix mixture_covariance() const;
};

/// Target density known up to a constant: pi = Z^{-1} exp(-V).
struct Potential {
  int dim = 0;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> grad;
  /// Fused path used by the batch kernels; same result as value+grad.
  std::function<double(const Vector&, Vector&)> value_and_grad;
  std::optional<double> log_normalizer;
};

/// V(x) = -log sum_k w_k |Sigma_k|^{-1/2} exp(-1/2 |Sigma_k^{-1/2}(x-m_k)|^2),
/// evaluated through log-sum-exp so it never overflows.
double mixture_potential(const MixtureTarget& target, const Vector& x);

/// grad V(x) = sum_k r_k(x) Sigma_k^{-1} (x - m_k) with log-space
/// responsibilities r_k.
Vector mixture_grad(const MixtureTarget& target, const Vector& x);

/// Normalized log pi(x) = -V(x) - (d/2) log(2 pi).
double mixture_log_density(const MixtureTarget& target, const Vector& x);

/// Posterior component responsibilities at x (sums to 1).
Vector mixture_responsibilities(const MixtureTarget& target, const Vector& x);

/// n i.i.d. draws, one row per sample: categorical component choice followed
/// by a Cholesky-transformed standard normal.
Matrix sample_mixture(const MixtureTarget& target, long n, Rng& rng);

Potential make_potential(const MixtureTarget& target);

/// Potential of the pushforward O^T_# pi: value x -> V(Ox),
/// gradient x -> O^T grad V(Ox). The normalizer is unchanged.
Potential rotate_potential(const Potential& pot, const Matrix& rotation);

/// {"weights":[...], "means":[[...]], "covariances":[[[...]]]}
MixtureTarget mixture_from_json(const nlohmann::json& doc);
nlohmann::json mixture_to_json(const MixtureTarget& target);

}  // namespace rovi
