#pragma once

#include "rovi/kernels.hpp"

namespace rovi {

/// Element of O(d); orthogonality |O^T O - I|_F <= 1e-10 is checked at
/// construction and re-checked after every retraction. Reflections
/// (det = -1) are allowed.
class OrthogonalMatrix {
 public:
  explicit OrthogonalMatrix(Matrix entries);
  static OrthogonalMatrix identity(int dim) {
    return OrthogonalMatrix(Matrix::Identity(dim, dim));
  }

  const Matrix& matrix() const { return entries_; }
  int dim() const { return static_cast<int>(entries_.rows()); }
  double orthogonality_defect() const;

 private:
  Matrix entries_;
};

/// Unconstrained gradient of the KL objective in O:
/// G(O) = sum_q w_q grad V(O T(x_q)) T(x_q)^T.
Matrix rotation_grad(const DictionaryTable& table, const SeparableMapParams& params,
                     const OrthogonalMatrix& rotation, const Potential& potential);

/// Projection onto the tangent space at O: G~ = G/2 - O G^T O / 2.
/// O^T G~ is skew-symmetric; equals G - O sym(O^T G) on O(d).
Matrix tangent_project(const OrthogonalMatrix& rotation, const Matrix& grad);

/// Q factor of M = QR under the diag(R) > 0 sign convention (unique).
/// Throws NumericalError when M is rank-deficient (|R_ii| < 1e-12).
OrthogonalMatrix qr_retract(const Matrix& m);

/// One Riemannian descent step: retract O - eta_o * G~(O).
OrthogonalMatrix rotation_step(const DictionaryTable& table,
                               const SeparableMapParams& params,
                               const OrthogonalMatrix& rotation,
                               const Potential& potential, double eta_o);

/// QR of an i.i.d. standard normal matrix with the positive-diagonal
/// convention; uniform enough over O(d) for multi-start diversity.
OrthogonalMatrix random_orthogonal(int dim, Rng& rng);

}  // namespace rovi
