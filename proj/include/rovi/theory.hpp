#pragma once

#include "rovi/common.hpp"
#include "rovi/target.hpp"

#include <functional>
#include <optional>
#include <utility>

namespace rovi {

/// Standard normal CDF via the complementary error function; absolute
/// error <= 1e-12.
double normal_cdf(double x);

/// Inverse standard normal CDF: rational approximation refined by one
/// Newton step; absolute error <= 1e-9. Requires p in (0, 1).
double normal_quantile(double p);

/// Pair of orthogonal separating half-spaces H_j^+- = {x : s_j x_j >< b_j},
/// H_k^+- likewise, with the achieved separation level
/// eps = max(1 - P0(H_j^- intersect H_k^-), 1 - P1(H_j^+ intersect H_k^+)).
struct SeparationCertificate {
  int j = 0;
  int k = 1;
  double b_j = 0;
  double b_k = 0;
  int s_j = 1;  // +1 or -1
  int s_k = 1;
  double epsilon = 0;
};

/// Mass bound sqrt(b / (2 log(1/eps))) - b / (2 log(1/eps)) on the smaller
/// of the two certified quadrant masses of any product-measure KL optimizer.
/// Requires 0 < eps <= exp(-2b); outside that region the bound does not
/// apply and an InputError is raised instead of a value.
double collapse_bound(double epsilon, double b);

/// min(-log w, -log(1-w)): KL of either component against the mixture.
double mixture_component_kl_bound(double w);

/// 1 - Phi(|m_j|) Phi(|m_k|): separation level of N(-m, I) vs N(m, I)
/// certified by the coordinate hyperplanes through the origin.
double gaussian_separation_epsilon(double m_j, double m_k);

/// Smallest |m| per coordinate for which the symmetric Gaussian pair is
/// provably delta-collapsed: Phi^{-1}(sqrt(beta)) with
/// beta = 1 - exp(-(2 log 2 - 2 max(log w, log(1-w))) / (1 - sqrt(1-4 delta))^2).
double gaussian_mean_threshold(double delta, double w);

/// w* = kl0 / (kl0 + kl1); requires kl0 + kl1 > 0.
double phase_transition_weight(double kl0, double kl1);

/// Closed-form KL(N(m0, S0) || N(m1, S1)).
double kl_gaussian(const Vector& m0, const Matrix& sigma0, const Vector& m1,
                   const Matrix& sigma1);

/// Exact KL from the best product approximation of N(m, Sigma) to the
/// Gaussian itself: (log det Sigma + sum_i log (Sigma^{-1})_ii) / 2. The
/// optimizer is N(m, D) with D = diag(Sigma^{-1})^{-1}.
double mfvi_gaussian_kl(const Matrix& sigma);

struct RoviGaussianBound {
  double value = 0;
  Matrix rotation;  // columns v_1 .. v_d realizing the bound
};

/// Upper bound on the rotated-product KL for w N(m0, Sigma) + (1-w) N(m1,
/// Sigma): zero when the means coincide, otherwise
/// (log det Sigma + sum_i log(v_i^T Sigma^{-1} v_i)) / 2 with v_1 the unit
/// mean gap and v_2..v_d eigenvectors of the projected precision.
RoviGaussianBound rovi_gaussian_bound(const Vector& m0, const Vector& m1,
                                      const Matrix& sigma);

/// Marginal CDF evaluator for one coordinate of a product measure.
using MarginalCdf = std::function<double(int coord, double x)>;

/// Certified quadrant masses (mu(H_j^- & H_k^-), mu(H_j^+ & H_k^+)) of a
/// product measure from its marginal CDFs.
std::pair<double, double> quadrant_mass(const MarginalCdf& cdf,
                                        const SeparationCertificate& cert);

/// Empirical quadrant masses from a sample matrix (one row per draw).
std::pair<double, double> quadrant_mass(const Matrix& samples,
                                        const SeparationCertificate& cert);

/// Best (smallest-epsilon) certificate over coordinate pairs and midpoint
/// offsets for a two-component mixture with diagonal covariances. Throws
/// InputError when no valid pair j != k with distinct means exists.
SeparationCertificate gaussian_product_separation(const MixtureTarget& target);

/// Everything the bounds CLI reports for a two-component mixture.
struct BoundReport {
  double b_surrogate = 0;       // log 2 + computable bound on inf KL
  double epsilon = 0;           // NaN when no certificate exists
  bool theorem_applicable = false;  // eps <= exp(-2 b_surrogate)
  double collapse = 0;          // NaN unless applicable
  double w_star = 0;            // NaN when undefined (both infima zero)
  double prop1_bound = 0;       // NaN unless both covariances match
  Matrix prop1_rotation;
  std::optional<SeparationCertificate> certificate;
};

BoundReport make_bound_report(const MixtureTarget& target);

}  // namespace rovi
