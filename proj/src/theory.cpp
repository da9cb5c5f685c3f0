#include "rovi/theory.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

namespace rovi {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

void check_pd(const Matrix& sigma, const char* op) {
  if (sigma.rows() != sigma.cols())
    throw InputError(std::string(op) + ": covariance must be square");
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw InputError(std::string(op) + ": covariance not positive definite");
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw InputError("normal_quantile: p must lie in (0, 1)");

  // Acklam's rational approximation (~1e-9), then one Newton step.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double density = normal_pdf(x);
  if (density > 0) x -= (normal_cdf(x) - p) / density;
  return x;
}

double collapse_bound(double epsilon, double b) {
  if (b <= 0) throw InputError("collapse_bound: b must be > 0");
  if (!(epsilon > 0) || epsilon > std::exp(-2.0 * b))
    throw InputError("collapse_bound: requires 0 < eps <= exp(-2b); the bound "
                     "does not apply");
  double ratio = b / (2.0 * std::log(1.0 / epsilon));
  return std::sqrt(ratio) - ratio;
}

double mixture_component_kl_bound(double w) {
  if (!(w > 0.0 && w < 1.0))
    throw InputError("mixture_component_kl_bound: w must lie in (0, 1)");
  return std::min(-std::log(w), -std::log1p(-w));
}

double gaussian_separation_epsilon(double m_j, double m_k) {
  return 1.0 - normal_cdf(std::abs(m_j)) * normal_cdf(std::abs(m_k));
}

double gaussian_mean_threshold(double delta, double w) {
  if (!(delta > 0.0 && delta <= 0.25))
    throw InputError("gaussian_mean_threshold: delta must lie in (0, 1/4]");
  if (!(w > 0.0 && w < 1.0))
    throw InputError("gaussian_mean_threshold: w must lie in (0, 1)");
  double numer = 2.0 * std::log(2.0) - 2.0 * std::max(std::log(w), std::log1p(-w));
  double denom = 1.0 - std::sqrt(1.0 - 4.0 * delta);
  double beta = 1.0 - std::exp(-numer / (denom * denom));
  return normal_quantile(std::sqrt(beta));
}

double phase_transition_weight(double kl0, double kl1) {
  if (kl0 < 0 || kl1 < 0)
    throw InputError("phase_transition_weight: KL values must be >= 0");
  if (kl0 + kl1 <= 0)
    throw InputError("phase_transition_weight: undefined when both optimal "
                     "KL values vanish");
  return kl0 / (kl0 + kl1);
}

double kl_gaussian(const Vector& m0, const Matrix& sigma0, const Vector& m1,
                   const Matrix& sigma1) {
  const long d = m0.size();
  if (m1.size() != d || sigma0.rows() != d || sigma1.rows() != d)
    throw InputError("kl_gaussian: dimension mismatch");
  check_pd(sigma0, "kl_gaussian");
  check_pd(sigma1, "kl_gaussian");
  Eigen::LLT<Matrix> llt0(sigma0), llt1(sigma1);
  double log_det0 = 2.0 * Matrix(llt0.matrixL()).diagonal().array().log().sum();
  double log_det1 = 2.0 * Matrix(llt1.matrixL()).diagonal().array().log().sum();
  Matrix prec1 = llt1.solve(Matrix::Identity(d, d));
  Vector diff = m0 - m1;
  return 0.5 * (log_det1 - log_det0 + (prec1 * sigma0).trace() -
                static_cast<double>(d) + diff.dot(prec1 * diff));
}

namespace {

/// Both product-KL calculators are >= 0 (Hadamard-Fischer); zero out
/// roundoff-scale negatives without masking real sign errors.
double clamp_roundoff(double v) { return v < 0 && v > -1e-9 ? 0.0 : v; }

}  // namespace

double mfvi_gaussian_kl(const Matrix& sigma) {
  check_pd(sigma, "mfvi_gaussian_kl");
  Eigen::LLT<Matrix> llt(sigma);
  double log_det = 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
  Matrix prec = llt.solve(Matrix::Identity(sigma.rows(), sigma.rows()));
  return clamp_roundoff(0.5 * (log_det + prec.diagonal().array().log().sum()));
}

RoviGaussianBound rovi_gaussian_bound(const Vector& m0, const Vector& m1,
                                      const Matrix& sigma) {
  const long d = m0.size();
  if (m1.size() != d || sigma.rows() != d)
    throw InputError("rovi_gaussian_bound: dimension mismatch");
  check_pd(sigma, "rovi_gaussian_bound");
  Eigen::LLT<Matrix> llt(sigma);
  Matrix prec = llt.solve(Matrix::Identity(d, d));

  RoviGaussianBound bound;
  Vector gap = m1 - m0;
  if (gap.norm() < 1e-14) {
    // Coincident means: the mixture is a single Gaussian, exactly
    // representable after rotating into the eigenbasis.
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma);
    bound.value = 0;
    bound.rotation = eig.eigenvectors();
    return bound;
  }

  Vector v1 = gap / gap.norm();
  Matrix proj = Matrix::Identity(d, d) - v1 * v1.transpose();
  Matrix m = proj * prec * proj;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);

  // Keep the d-1 eigenvectors spanning v1's orthogonal complement: drop the
  // one most aligned with v1 (its eigenvalue is ~0 by construction).
  int drop = 0;
  double best_align = -1;
  for (int i = 0; i < d; ++i) {
    double align = std::abs(eig.eigenvectors().col(i).dot(v1));
    if (align > best_align) {
      best_align = align;
      drop = i;
    }
  }
  bound.rotation.resize(d, d);
  bound.rotation.col(0) = v1;
  int col = 1;
  for (int i = 0; i < d; ++i) {
    if (i == drop) continue;
    bound.rotation.col(col++) = eig.eigenvectors().col(i);
  }

  double sum = 0;
  for (int i = 0; i < d; ++i) {
    Vector v = bound.rotation.col(i);
    sum += std::log(v.dot(prec * v));
  }
  double log_det = 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
  bound.value = clamp_roundoff(0.5 * (log_det + sum));
  return bound;
}

namespace {

/// P(s x < b) for the marginal law of one coordinate.
double half_space_mass(const MarginalCdf& cdf, int coord, int sign, double b) {
  return sign > 0 ? cdf(coord, b) : 1.0 - cdf(coord, -b);
}

}  // namespace

std::pair<double, double> quadrant_mass(const MarginalCdf& cdf,
                                        const SeparationCertificate& cert) {
  double aj_minus = half_space_mass(cdf, cert.j, cert.s_j, cert.b_j);
  double ak_minus = half_space_mass(cdf, cert.k, cert.s_k, cert.b_k);
  return {aj_minus * ak_minus, (1.0 - aj_minus) * (1.0 - ak_minus)};
}

std::pair<double, double> quadrant_mass(const Matrix& samples,
                                        const SeparationCertificate& cert) {
  if (samples.rows() == 0) throw InputError("quadrant_mass: empty sample set");
  if (cert.j >= samples.cols() || cert.k >= samples.cols())
    throw InputError("quadrant_mass: certificate coordinate out of range");
  long lower = 0, upper = 0;
  for (long r = 0; r < samples.rows(); ++r) {
    bool j_minus = cert.s_j * samples(r, cert.j) < cert.b_j;
    bool k_minus = cert.s_k * samples(r, cert.k) < cert.b_k;
    if (j_minus && k_minus) ++lower;
    if (!j_minus && !k_minus) ++upper;
  }
  double n = static_cast<double>(samples.rows());
  return {lower / n, upper / n};
}

SeparationCertificate gaussian_product_separation(const MixtureTarget& target) {
  if (target.num_components() != 2)
    throw InputError("gaussian_product_separation: needs exactly 2 components");
  const int d = target.dim();
  for (const auto& comp : target.components) {
    Matrix off = comp.covariance();
    off.diagonal().setZero();
    if (off.cwiseAbs().maxCoeff() > 1e-12)
      throw InputError("gaussian_product_separation: components must have "
                       "diagonal covariances");
  }
  const auto& c0 = target.components[0];
  const auto& c1 = target.components[1];

  // Per coordinate: midpoint offset, sign oriented so component 0 sits on
  // the minus side, and the exact Gaussian half-space masses.
  std::vector<int> usable;
  Vector b(d), p0(d), p1(d);
  std::vector<int> sign(d, 1);
  for (int i = 0; i < d; ++i) {
    double mu0 = c0.mean()[i], mu1 = c1.mean()[i];
    if (mu0 == mu1) continue;
    int s = mu0 < mu1 ? 1 : -1;
    double mid = 0.5 * (mu0 + mu1);
    double sd0 = std::sqrt(c0.covariance()(i, i));
    double sd1 = std::sqrt(c1.covariance()(i, i));
    usable.push_back(i);
    sign[i] = s;
    b[i] = s * mid;
    p0[i] = normal_cdf((s * mid - s * mu0) / sd0);  // P0(s x_i < b_i)
    p1[i] = 1.0 - normal_cdf((s * mid - s * mu1) / sd1);
  }
  if (usable.size() < 2)
    throw InputError("gaussian_product_separation: no certificate (need two "
                     "coordinates with distinct means)");

  SeparationCertificate best;
  best.epsilon = 2.0;
  for (size_t a = 0; a < usable.size(); ++a)
    for (size_t bb = a + 1; bb < usable.size(); ++bb) {
      int j = usable[a], k = usable[bb];
      double eps = std::max(1.0 - p0[j] * p0[k], 1.0 - p1[j] * p1[k]);
      if (eps < best.epsilon) {
        best.j = j;
        best.k = k;
        best.s_j = sign[j];
        best.s_k = sign[k];
        best.b_j = b[j];
        best.b_k = b[k];
        best.epsilon = eps;
      }
    }
  return best;
}

BoundReport make_bound_report(const MixtureTarget& target) {
  if (target.num_components() != 2)
    throw InputError("make_bound_report: needs exactly 2 components");
  BoundReport report;
  const double w = target.weights[0];
  const auto& c0 = target.components[0];
  const auto& c1 = target.components[1];

  // Computable upper bound on b = log 2 + inf KL: product-optimize either
  // component and pay its mixture weight (chain-rule bound).
  double via0 = -std::log(w) + mfvi_gaussian_kl(c0.covariance());
  double via1 = -std::log1p(-w) + mfvi_gaussian_kl(c1.covariance());
  report.b_surrogate = std::log(2.0) + std::min(via0, via1);

  report.epsilon = kNan;
  report.collapse = kNan;
  try {
    report.certificate = gaussian_product_separation(target);
    report.epsilon = report.certificate->epsilon;
  } catch (const InputError&) {
    report.certificate.reset();
  }
  report.theorem_applicable =
      report.certificate.has_value() && report.epsilon > 0 &&
      report.epsilon <= std::exp(-2.0 * report.b_surrogate);
  if (report.theorem_applicable)
    report.collapse = collapse_bound(report.epsilon, report.b_surrogate);

  double kl0 = mfvi_gaussian_kl(c0.covariance());
  double kl1 = mfvi_gaussian_kl(c1.covariance());
  report.w_star = kl0 + kl1 > 0 ? phase_transition_weight(kl0, kl1) : kNan;

  if ((c0.covariance() - c1.covariance()).cwiseAbs().maxCoeff() <= 1e-12) {
    RoviGaussianBound bound =
        rovi_gaussian_bound(c0.mean(), c1.mean(), c0.covariance());
    report.prop1_bound = bound.value;
    report.prop1_rotation = bound.rotation;
  } else {
    report.prop1_bound = kNan;
  }
  return report;
}

}  // namespace rovi
