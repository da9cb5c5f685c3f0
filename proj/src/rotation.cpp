#include "rovi/rotation.hpp"

#include <Eigen/QR>
#include <cmath>

namespace rovi {

namespace {
constexpr double kOrthTol = 1e-10;
constexpr double kRankTol = 1e-12;
}  // namespace

OrthogonalMatrix::OrthogonalMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() < 1)
    throw InputError("OrthogonalMatrix: must be square and nonempty");
  if (orthogonality_defect() > kOrthTol)
    throw InputError("OrthogonalMatrix: |O^T O - I|_F exceeds 1e-10");
}

double OrthogonalMatrix::orthogonality_defect() const {
  int d = static_cast<int>(entries_.rows());
  return (entries_.transpose() * entries_ - Matrix::Identity(d, d)).norm();
}

Matrix rotation_grad(const DictionaryTable& table, const SeparableMapParams& params,
                     const OrthogonalMatrix& rotation, const Potential& potential) {
  return eval_rotation_grad(table, params, rotation.matrix(), potential);
}

Matrix tangent_project(const OrthogonalMatrix& rotation, const Matrix& grad) {
  const Matrix& o = rotation.matrix();
  if (grad.rows() != o.rows() || grad.cols() != o.cols())
    throw InputError("tangent_project: gradient shape mismatch");
  return 0.5 * grad - 0.5 * o * grad.transpose() * o;
}

OrthogonalMatrix qr_retract(const Matrix& m) {
  if (m.rows() != m.cols()) throw InputError("qr_retract: matrix must be square");
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < m.rows(); ++i) {
    if (std::abs(r(i, i)) < kRankTol)
      throw NumericalError("qr_retract: rank-deficient matrix");
    if (r(i, i) < 0) q.col(i) = -q.col(i);
  }
  return OrthogonalMatrix(std::move(q));
}

OrthogonalMatrix rotation_step(const DictionaryTable& table,
                               const SeparableMapParams& params,
                               const OrthogonalMatrix& rotation,
                               const Potential& potential, double eta_o) {
  Matrix g = rotation_grad(table, params, rotation, potential);
  Matrix tangent = tangent_project(rotation, g);
  return qr_retract(rotation.matrix() - eta_o * tangent);
}

OrthogonalMatrix random_orthogonal(int dim, Rng& rng) {
  if (dim < 1) throw InputError("random_orthogonal: dimension must be >= 1");
  std::normal_distribution<double> normal;
  Matrix m(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) m(r, c) = normal(rng);
  return qr_retract(m);
}

}  // namespace rovi
