#pragma once

#include "rovi/quadrature.hpp"
#include "rovi/target.hpp"
#include "rovi/transport.hpp"

#include <vector>

namespace rovi {

/// Dictionary values and slopes tabulated at the quadrature points, built
/// once per (dictionary, quadrature) pair. values[i](q, t) = T_t(x_{q,i}).
struct DictionaryTable {
  std::vector<Matrix> values;  // per coordinate: n x |M|
  std::vector<Matrix> slopes;  // per coordinate: n x |M|
  Vector weights;              // quadrature weights
  int dim = 0;
  long size = 0;
  bool monte_carlo = true;
};

DictionaryTable build_table(const Dictionary& dict, const QuadratureSet& quad);

/// Quadrature sums of the KL integrand pieces: potential = sum_q w_q
/// V(O T(x_q)), log_jacobian = sum_q w_q log det DT(x_q), and the weighted
/// second moment of (V - log det DT) used for Monte Carlo standard errors.
struct ObjectiveTerms {
  double potential = 0;
  double log_jacobian = 0;
  double second_moment = 0;
};

/// ObjectiveTerms plus the partial gradients in (lambda, v), assembled in
/// the same pass over the quadrature points.
struct ObjectiveGrads {
  ObjectiveTerms terms;
  Vector grad_shift;   // d
  Matrix grad_coeffs;  // |M| x d
};

// Production kernels: OpenMP over fixed-size point blocks, block partials
// combined in block order, so results are bit-identical across thread
// counts.
ObjectiveTerms eval_objective(const DictionaryTable& table,
                              const SeparableMapParams& params, const Matrix& rotation,
                              const Potential& potential);
ObjectiveGrads eval_objective_grads(const DictionaryTable& table,
                                    const SeparableMapParams& params,
                                    const Matrix& rotation, const Potential& potential);
/// sum_q w_q grad V(O T(x_q)) T(x_q)^T, the unconstrained rotation gradient.
Matrix eval_rotation_grad(const DictionaryTable& table,
                          const SeparableMapParams& params, const Matrix& rotation,
                          const Potential& potential);

namespace reference {

// Serial reference implementations: one plain loop over quadrature points,
// no blocking, kept for correctness tests and the kernel benchmark.
ObjectiveTerms eval_objective(const DictionaryTable& table,
                              const SeparableMapParams& params, const Matrix& rotation,
                              const Potential& potential);
ObjectiveGrads eval_objective_grads(const DictionaryTable& table,
                                    const SeparableMapParams& params,
                                    const Matrix& rotation, const Potential& potential);
Matrix eval_rotation_grad(const DictionaryTable& table,
                          const SeparableMapParams& params, const Matrix& rotation,
                          const Potential& potential);

}  // namespace reference

}  // namespace rovi
