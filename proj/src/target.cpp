#include "rovi/target.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <memory>

namespace rovi {

namespace {

constexpr double kSymTol = 1e-12;
constexpr double kWeightTol = 1e-12;
constexpr double kMinPivot = 1e-10;  // on L_ii^2, the diagonal of LDL^T

void check_dim(const MixtureTarget& target, const Vector& x, const char* op) {
  if (x.size() != target.dim())
    throw InputError(std::string(op) + ": point has dimension " +
                     std::to_string(x.size()) + ", target expects " +
                     std::to_string(target.dim()));
}

/// Per-component log w_k - 1/2 log|Sigma_k| - 1/2 |L_k^{-1}(x-m_k)|^2.
Vector component_log_terms(const MixtureTarget& target, const Vector& x) {
  const int k = target.num_components();
  Vector logs(k);
  for (int i = 0; i < k; ++i) {
    double w = target.weights[i];
    if (w <= 0) {
      logs[i] = -std::numeric_limits<double>::infinity();
      continue;
    }
    logs[i] = std::log(w) + target.components[i].unnormalized_log_density(x);
  }
  return logs;
}

double log_sum_exp(const Vector& logs) {
  double m = logs.maxCoeff();
  if (!std::isfinite(m)) return m;  // all -inf (or a NaN input)
  double s = 0;
  for (long i = 0; i < logs.size(); ++i) s += std::exp(logs[i] - m);
  return m + std::log(s);
}

}  // namespace

GaussianComponent::GaussianComponent(Vector mean, Matrix covariance)
    : mean_(std::move(mean)), covariance_(std::move(covariance)) {
  const long d = mean_.size();
  if (d < 1) throw InputError("GaussianComponent: empty mean");
  if (covariance_.rows() != d || covariance_.cols() != d)
    throw InputError("GaussianComponent: covariance shape does not match mean");
  if ((covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() > kSymTol)
    throw InputError("GaussianComponent: covariance is not symmetric");

  Eigen::LLT<Matrix> llt(covariance_);
  if (llt.info() != Eigen::Success)
    throw InputError("GaussianComponent: covariance is not positive definite");
  chol_lower_ = llt.matrixL();
  double min_pivot = chol_lower_.diagonal().array().square().minCoeff();
  if (min_pivot < kMinPivot)
    throw InputError("GaussianComponent: covariance is near-singular");

  log_det_ = 2.0 * chol_lower_.diagonal().array().log().sum();
  precision_ = llt.solve(Matrix::Identity(d, d));
}

double GaussianComponent::unnormalized_log_density(const Vector& x) const {
  Vector z = chol_lower_.triangularView<Eigen::Lower>().solve(x - mean_);
  return -0.5 * z.squaredNorm() - 0.5 * log_det_;
}

MixtureTarget::MixtureTarget(Vector w, std::vector<GaussianComponent> comps)
    : weights(std::move(w)), components(std::move(comps)) {
  if (components.empty()) throw InputError("MixtureTarget: need >= 1 component");
  if (weights.size() != static_cast<long>(components.size()))
    throw InputError("MixtureTarget: weights/components length mismatch");
  if (weights.minCoeff() < 0)
    throw InputError("MixtureTarget: weights must be nonnegative");
  if (std::abs(weights.sum() - 1.0) > kWeightTol)
    throw InputError("MixtureTarget: weights must sum to 1");
  const int d = components.front().dim();
  for (const auto& c : components)
    if (c.dim() != d) throw InputError("MixtureTarget: mixed dimensions");
}

double MixtureTarget::log_normalizer() const {
  return 0.5 * dim() * std::log(2.0 * M_PI);
}

Vector MixtureTarget::mixture_mean() const {
  Vector m = Vector::Zero(dim());
  for (int k = 0; k < num_components(); ++k)
    m += weights[k] * components[k].mean();
  return m;
}

Matrix MixtureTarget::mixture_covariance() const {
  Vector m = mixture_mean();
  Matrix cov = Matrix::Zero(dim(), dim());
  for (int k = 0; k < num_components(); ++k) {
    Vector diff = components[k].mean() - m;
    cov += weights[k] * (components[k].covariance() + diff * diff.transpose());
  }
  return cov;
}

double mixture_potential(const MixtureTarget& target, const Vector& x) {
  check_dim(target, x, "mixture_potential");
  return -log_sum_exp(component_log_terms(target, x));
}

Vector mixture_responsibilities(const MixtureTarget& target, const Vector& x) {
  check_dim(target, x, "mixture_responsibilities");
  Vector logs = component_log_terms(target, x);
  double lse = log_sum_exp(logs);
  Vector r(logs.size());
  for (long i = 0; i < logs.size(); ++i) r[i] = std::exp(logs[i] - lse);
  return r;
}

Vector mixture_grad(const MixtureTarget& target, const Vector& x) {
  check_dim(target, x, "mixture_grad");
  Vector r = mixture_responsibilities(target, x);
  Vector g = Vector::Zero(x.size());
  for (int k = 0; k < target.num_components(); ++k) {
    if (r[k] == 0) continue;
    g += r[k] * (target.components[k].precision() * (x - target.components[k].mean()));
  }
  return g;
}

double mixture_log_density(const MixtureTarget& target, const Vector& x) {
  check_dim(target, x, "mixture_log_density");
  return -mixture_potential(target, x) - target.log_normalizer();
}

Matrix sample_mixture(const MixtureTarget& target, long n, Rng& rng) {
  if (n < 1) throw InputError("sample_mixture: need n >= 1");
  const int d = target.dim();
  Matrix out(n, d);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal;
  Vector z(d);
  for (long r = 0; r < n; ++r) {
    double u = unif(rng);
    int pick = target.num_components() - 1;
    double acc = 0;
    for (int k = 0; k < target.num_components(); ++k) {
      acc += target.weights[k];
      if (u <= acc) {
        pick = k;
        break;
      }
    }
    for (int c = 0; c < d; ++c) z[c] = normal(rng);
    const auto& comp = target.components[pick];
    out.row(r) = (comp.mean() + comp.chol_lower() * z).transpose();
  }
  return out;
}

Potential make_potential(const MixtureTarget& target) {
  auto shared = std::make_shared<MixtureTarget>(target);
  Potential pot;
  pot.dim = shared->dim();
  pot.log_normalizer = shared->log_normalizer();
  pot.value = [shared](const Vector& x) { return mixture_potential(*shared, x); };
  pot.grad = [shared](const Vector& x) { return mixture_grad(*shared, x); };
  pot.value_and_grad = [shared](const Vector& x, Vector& g) {
    g = mixture_grad(*shared, x);
    return mixture_potential(*shared, x);
  };
  return pot;
}

Potential rotate_potential(const Potential& pot, const Matrix& rotation) {
  if (rotation.rows() != pot.dim || rotation.cols() != pot.dim)
    throw InputError("rotate_potential: rotation shape mismatch");
  Potential out;
  out.dim = pot.dim;
  out.log_normalizer = pot.log_normalizer;
  Matrix o = rotation;
  Potential base = pot;
  out.value = [base, o](const Vector& x) { return base.value(o * x); };
  out.grad = [base, o](const Vector& x) -> Vector {
    return o.transpose() * base.grad(o * x);
  };
  out.value_and_grad = [base, o](const Vector& x, Vector& g) {
    Vector y = o * x;
    double v;
    if (base.value_and_grad) {
      v = base.value_and_grad(y, g);
    } else {
      v = base.value(y);
      g = base.grad(y);
    }
    g = (o.transpose() * g).eval();
    return v;
  };
  return out;
}

MixtureTarget mixture_from_json(const nlohmann::json& doc) {
  try {
    const auto& jw = doc.at("weights");
    const auto& jm = doc.at("means");
    const auto& jc = doc.at("covariances");
    if (!jw.is_array() || !jm.is_array() || !jc.is_array())
      throw InputError("mixture json: weights/means/covariances must be arrays");
    const size_t k = jw.size();
    if (jm.size() != k || jc.size() != k)
      throw InputError("mixture json: weights/means/covariances lengths differ");
    Vector weights(k);
    std::vector<GaussianComponent> comps;
    comps.reserve(k);
    for (size_t i = 0; i < k; ++i) {
      weights[static_cast<long>(i)] = jw[i].get<double>();
      const auto& mean_arr = jm[i];
      Vector mean(mean_arr.size());
      for (size_t c = 0; c < mean_arr.size(); ++c)
        mean[static_cast<long>(c)] = mean_arr[c].get<double>();
      const auto& cov_arr = jc[i];
      Matrix cov(cov_arr.size(), cov_arr.size());
      for (size_t r = 0; r < cov_arr.size(); ++r) {
        if (cov_arr[r].size() != cov_arr.size())
          throw InputError("mixture json: covariance must be square");
        for (size_t c = 0; c < cov_arr.size(); ++c)
          cov(static_cast<long>(r), static_cast<long>(c)) = cov_arr[r][c].get<double>();
      }
      comps.emplace_back(std::move(mean), std::move(cov));
    }
    return MixtureTarget(std::move(weights), std::move(comps));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("mixture json: ") + e.what());
  }
}

nlohmann::json mixture_to_json(const MixtureTarget& target) {
  nlohmann::json doc;
  doc["weights"] = std::vector<double>(target.weights.begin(), target.weights.end());
  auto& means = doc["means"] = nlohmann::json::array();
  auto& covs = doc["covariances"] = nlohmann::json::array();
  for (const auto& comp : target.components) {
    means.push_back(std::vector<double>(comp.mean().begin(), comp.mean().end()));
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < comp.dim(); ++r) {
      std::vector<double> row(comp.dim());
      for (int c = 0; c < comp.dim(); ++c) row[c] = comp.covariance()(r, c);
      rows.push_back(row);
    }
    covs.push_back(rows);
  }
  return doc;
}

}  // namespace rovi
