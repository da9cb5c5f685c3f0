#include "rovi/presets.hpp"

namespace rovi {

namespace {

MixtureTarget symmetric_pair(double m) {
  Vector w(2);
  w << 0.5, 0.5;
  Vector m0(2), m1(2);
  m0 << -m, -m;
  m1 << m, m;
  Matrix eye = Matrix::Identity(2, 2);
  return MixtureTarget(w, {GaussianComponent(m0, eye), GaussianComponent(m1, eye)});
}

MixtureTarget two_component(double w0, Vector m0, Matrix s0, Vector m1, Matrix s1) {
  Vector w(2);
  w << w0, 1.0 - w0;
  return MixtureTarget(w, {GaussianComponent(std::move(m0), std::move(s0)),
                           GaussianComponent(std::move(m1), std::move(s1))});
}

MixtureTarget single(Vector m, Matrix s) {
  Vector w(1);
  w << 1.0;
  return MixtureTarget(w, {GaussianComponent(std::move(m), std::move(s))});
}

std::vector<ExperimentPreset> build_presets() {
  std::vector<ExperimentPreset> presets;
  auto vec2 = [](double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
  };
  auto mat2 = [](double a, double b, double c, double d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
  };
  Matrix eye = Matrix::Identity(2, 2);

  presets.push_back({"fig1-m1", symmetric_pair(1.0),
                     "symmetric equal-weight pair at +-(1,1), unit covariances"});
  presets.push_back({"fig1-m2", symmetric_pair(2.0),
                     "symmetric equal-weight pair at +-(2,2), unit covariances"});
  presets.push_back({"fig1-m3", symmetric_pair(3.0),
                     "symmetric equal-weight pair at +-(3,3); product fits "
                     "collapse to one mode"});
  presets.push_back({"fig3a", single(vec2(0, 0), mat2(1.8, 1.2, 1.2, 1.0)),
                     "single correlated Gaussian; product fits are "
                     "underdispersed, a rotation recovers it exactly"});
  presets.push_back({"fig3b",
                     two_component(0.4, vec2(-2.5, 0), eye, vec2(2.5, 0), eye),
                     "modes 0.4/0.6 on a shared horizontal axis"});
  presets.push_back({"fig3c",
                     two_component(0.5, vec2(-2.5, -1.5), eye, vec2(2.0, 1.0), eye),
                     "misaligned equal-weight modes, unit covariances"});
  presets.push_back({"fig3d",
                     two_component(0.5, vec2(-8, -8), eye, vec2(8, 8), eye),
                     "far-apart equal-weight modes, unit covariances"});
  presets.push_back({"fig3e",
                     two_component(0.5, vec2(-2.0, -2.0), mat2(1.8, -0.6, -0.6, 1.2),
                                   vec2(2.5, 2.0), mat2(0.7, 0, 0, 1.1)),
                     "asymmetric covariances"});
  // First covariance symmetrized from the upper triangle ([[2,-0.6],[.,2]]).
  presets.push_back({"fig3f",
                     two_component(0.5, vec2(-5.0, -5.0), mat2(2.0, -0.6, -0.6, 2.0),
                                   vec2(2.5, 2.0), mat2(0.7, 0, 0, 1.1)),
                     "far-apart modes with asymmetric covariances; every "
                     "method collapses"});
  presets.push_back({"fig4", symmetric_pair(3.0),
                     "alias of the m=3 symmetric pair used for the marginal "
                     "comparison run"});
  return presets;
}

}  // namespace

const std::vector<ExperimentPreset>& experiment_presets() {
  static const std::vector<ExperimentPreset> presets = build_presets();
  return presets;
}

std::optional<ExperimentPreset> find_preset(const std::string& name) {
  for (const auto& preset : experiment_presets())
    if (preset.name == name) return preset;
  return std::nullopt;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& preset : experiment_presets()) names.push_back(preset.name);
  return names;
}

}  // namespace rovi
