#include "rovi/kernels.hpp"

#include <cmath>

namespace rovi {

namespace {

void check_inputs(const DictionaryTable& table, const SeparableMapParams& params,
                  const Matrix& rotation, const Potential& potential) {
  if (params.dim() != table.dim || params.coeffs.rows() != table.values.front().cols())
    throw InputError("kernel: map params do not match dictionary table");
  if (rotation.rows() != table.dim || rotation.cols() != table.dim)
    throw InputError("kernel: rotation shape mismatch");
  if (potential.dim != table.dim)
    throw InputError("kernel: potential dimension mismatch");
  if (params.coeffs.minCoeff() < 0)
    throw InputError("kernel: coefficients must be nonnegative");
}

struct BlockAccum {
  ObjectiveTerms terms;
  Vector grad_shift;
  Matrix grad_coeffs;
  Matrix rotation_grad;
  bool singular = false;
};

enum class Want { Objective, Grads, RotationGrad };

/// One block of quadrature rows [row0, row0+len): maps the points forward,
/// rotates, evaluates the potential rowwise, and reduces the requested
/// quantities into `acc`.
void run_block(const DictionaryTable& table, const SeparableMapParams& params,
               const Matrix& rotation, const Potential& potential, long row0,
               long len, Want want, BlockAccum& acc) {
  const int d = table.dim;
  const int m = static_cast<int>(params.coeffs.rows());

  Matrix mapped(len, d);       // T(x_q) rows
  Matrix derivs(len, d);       // diagonal Jacobian entries
  for (int i = 0; i < d; ++i) {
    mapped.col(i) = table.values[i].middleRows(row0, len) * params.coeffs.col(i);
    mapped.col(i).array() += params.shift[i];
    derivs.col(i) = table.slopes[i].middleRows(row0, len) * params.coeffs.col(i);
  }
  if (derivs.minCoeff() <= 0) {
    acc.singular = true;
    return;
  }

  Matrix rotated = mapped * rotation.transpose();  // rows (O T(x_q))^T
  const auto w = table.weights.segment(row0, len);

  Vector pot_vals(len);
  Matrix grads;  // rows grad V(O T(x_q))^T
  const bool need_grads = want != Want::Objective;
  if (need_grads) grads.resize(len, d);
  Vector x(d), g(d);
  for (long r = 0; r < len; ++r) {
    x = rotated.row(r).transpose();
    if (need_grads) {
      if (potential.value_and_grad) {
        pot_vals[r] = potential.value_and_grad(x, g);
      } else {
        pot_vals[r] = potential.value(x);
        g = potential.grad(x);
      }
      grads.row(r) = g.transpose();
    } else {
      pot_vals[r] = potential.value(x);
    }
  }

  Vector log_jac = derivs.array().log().rowwise().sum();
  acc.terms.potential = w.dot(pot_vals);
  acc.terms.log_jacobian = w.dot(log_jac);
  acc.terms.second_moment = w.dot((pot_vals - log_jac).array().square().matrix());

  if (want == Want::Grads) {
    Matrix back = grads * rotation;  // rows (O^T grad V)^T
    acc.grad_shift = back.transpose() * w;
    acc.grad_coeffs.resize(m, d);
    for (int i = 0; i < d; ++i) {
      Vector pot_part = w.cwiseProduct(back.col(i));
      Vector ent_part = w.cwiseProduct(derivs.col(i).cwiseInverse());
      acc.grad_coeffs.col(i) =
          table.values[i].middleRows(row0, len).transpose() * pot_part -
          table.slopes[i].middleRows(row0, len).transpose() * ent_part;
    }
  } else if (want == Want::RotationGrad) {
    acc.rotation_grad = grads.transpose() * w.asDiagonal() * mapped;
  }
}

BlockAccum reduce_blocks(const DictionaryTable& table, const SeparableMapParams& params,
                         const Matrix& rotation, const Potential& potential, Want want) {
  check_inputs(table, params, rotation, potential);
  const int nblocks = parallel::block_count(table.size);
  std::vector<BlockAccum> partials(nblocks);
  std::exception_ptr error;

#pragma omp parallel for schedule(static) num_threads(parallel::threads())
  for (int b = 0; b < nblocks; ++b) {
    try {
      long row0 = static_cast<long>(b) * parallel::kReductionBlock;
      long len = std::min<long>(parallel::kReductionBlock, table.size - row0);
      run_block(table, params, rotation, potential, row0, len, want, partials[b]);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  BlockAccum total;
  const int d = table.dim;
  const int m = static_cast<int>(params.coeffs.rows());
  if (want == Want::Grads) {
    total.grad_shift = Vector::Zero(d);
    total.grad_coeffs = Matrix::Zero(m, d);
  }
  if (want == Want::RotationGrad) total.rotation_grad = Matrix::Zero(d, d);
  for (const BlockAccum& p : partials) {
    if (p.singular) total.singular = true;
    total.terms.potential += p.terms.potential;
    total.terms.log_jacobian += p.terms.log_jacobian;
    total.terms.second_moment += p.terms.second_moment;
    if (want == Want::Grads) {
      total.grad_shift += p.grad_shift;
      total.grad_coeffs += p.grad_coeffs;
    }
    if (want == Want::RotationGrad) total.rotation_grad += p.rotation_grad;
  }
  if (total.singular)
    throw NumericalError("kernel: singular map (nonpositive Jacobian entry)");
  return total;
}

}  // namespace

DictionaryTable build_table(const Dictionary& dict, const QuadratureSet& quad) {
  DictionaryTable table;
  table.dim = quad.dim();
  table.size = quad.size();
  table.weights = quad.weights;
  table.monte_carlo = quad.is_monte_carlo();
  table.values.reserve(table.dim);
  table.slopes.reserve(table.dim);
  for (int i = 0; i < table.dim; ++i) {
    Matrix vals(table.size, dict.size());
    Matrix slopes(table.size, dict.size());
    for (long q = 0; q < table.size; ++q) {
      double x = quad.points(q, i);
      for (int t = 0; t < dict.size(); ++t) {
        vals(q, t) = dict.entry(t).value(x);
        slopes(q, t) = dict.entry(t).slope(x);
      }
    }
    table.values.push_back(std::move(vals));
    table.slopes.push_back(std::move(slopes));
  }
  return table;
}

ObjectiveTerms eval_objective(const DictionaryTable& table,
                              const SeparableMapParams& params, const Matrix& rotation,
                              const Potential& potential) {
  return reduce_blocks(table, params, rotation, potential, Want::Objective).terms;
}

ObjectiveGrads eval_objective_grads(const DictionaryTable& table,
                                    const SeparableMapParams& params,
                                    const Matrix& rotation, const Potential& potential) {
  BlockAccum acc = reduce_blocks(table, params, rotation, potential, Want::Grads);
  return ObjectiveGrads{acc.terms, std::move(acc.grad_shift), std::move(acc.grad_coeffs)};
}

Matrix eval_rotation_grad(const DictionaryTable& table,
                          const SeparableMapParams& params, const Matrix& rotation,
                          const Potential& potential) {
  return reduce_blocks(table, params, rotation, potential, Want::RotationGrad)
      .rotation_grad;
}

namespace reference {

namespace {

struct PointwiseResult {
  double pot;
  double log_jac;
  Vector mapped;
  Vector grad;  // grad V at the rotated point
};

PointwiseResult eval_point(const DictionaryTable& table,
                           const SeparableMapParams& params, const Matrix& rotation,
                           const Potential& potential, long q, bool need_grad) {
  const int d = table.dim;
  PointwiseResult res;
  res.mapped.resize(d);
  res.log_jac = 0;
  for (int i = 0; i < d; ++i) {
    double y = params.shift[i];
    double deriv = 0;
    for (int t = 0; t < params.coeffs.rows(); ++t) {
      y += params.coeffs(t, i) * table.values[i](q, t);
      deriv += params.coeffs(t, i) * table.slopes[i](q, t);
    }
    if (deriv <= 0)
      throw NumericalError("kernel: singular map (nonpositive Jacobian entry)");
    res.mapped[i] = y;
    res.log_jac += std::log(deriv);
  }
  Vector x = rotation * res.mapped;
  res.pot = potential.value(x);
  if (need_grad) res.grad = potential.grad(x);
  return res;
}

}  // namespace

ObjectiveTerms eval_objective(const DictionaryTable& table,
                              const SeparableMapParams& params, const Matrix& rotation,
                              const Potential& potential) {
  check_inputs(table, params, rotation, potential);
  ObjectiveTerms terms;
  for (long q = 0; q < table.size; ++q) {
    PointwiseResult r = eval_point(table, params, rotation, potential, q, false);
    double w = table.weights[q];
    terms.potential += w * r.pot;
    terms.log_jacobian += w * r.log_jac;
    terms.second_moment += w * (r.pot - r.log_jac) * (r.pot - r.log_jac);
  }
  return terms;
}

ObjectiveGrads eval_objective_grads(const DictionaryTable& table,
                                    const SeparableMapParams& params,
                                    const Matrix& rotation, const Potential& potential) {
  check_inputs(table, params, rotation, potential);
  const int d = table.dim;
  const int m = static_cast<int>(params.coeffs.rows());
  ObjectiveGrads out;
  out.grad_shift = Vector::Zero(d);
  out.grad_coeffs = Matrix::Zero(m, d);
  for (long q = 0; q < table.size; ++q) {
    PointwiseResult r = eval_point(table, params, rotation, potential, q, true);
    double w = table.weights[q];
    out.terms.potential += w * r.pot;
    out.terms.log_jacobian += w * r.log_jac;
    out.terms.second_moment += w * (r.pot - r.log_jac) * (r.pot - r.log_jac);
    Vector back = rotation.transpose() * r.grad;
    out.grad_shift += w * back;
    for (int i = 0; i < d; ++i) {
      double deriv = 0;
      for (int t = 0; t < m; ++t) deriv += params.coeffs(t, i) * table.slopes[i](q, t);
      for (int t = 0; t < m; ++t)
        out.grad_coeffs(t, i) += w * (back[i] * table.values[i](q, t) -
                                      table.slopes[i](q, t) / deriv);
    }
  }
  return out;
}

Matrix eval_rotation_grad(const DictionaryTable& table,
                          const SeparableMapParams& params, const Matrix& rotation,
                          const Potential& potential) {
  check_inputs(table, params, rotation, potential);
  Matrix g = Matrix::Zero(table.dim, table.dim);
  for (long q = 0; q < table.size; ++q) {
    PointwiseResult r = eval_point(table, params, rotation, potential, q, true);
    g += table.weights[q] * r.grad * r.mapped.transpose();
  }
  return g;
}

}  // namespace reference

}  // namespace rovi
