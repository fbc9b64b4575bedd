#pragma once

#include <cstddef>
#include <vector>

#include "rsclust/dense.hpp"
#include "rsclust/random.hpp"

namespace rsclust {

inline constexpr double kQrRankTol = 1e-12;

struct QrResult {
  Matrix q;                               // n x l' with orthonormal columns
  std::vector<std::size_t> kept_columns;  // input column behind each column of q
  std::size_t dropped() const noexcept;
  std::size_t input_columns = 0;
};

// Householder QR returning only the orthonormal factor. A column whose
// residual norm (after removing the span of the previously kept columns) is
// at most rank_tol times the largest input column norm is dropped. Columns
// of q are signed so that the implied R has a positive diagonal.
//
// Throws DimensionError when rows < cols and EmptyRangeError when every
// column is dropped. Drops are reported through warn() unless quiet is set.
QrResult qr_orthonormalize(const Matrix& y, double rank_tol = kQrRankTol, bool quiet = false);

// Full eigendecomposition of a small symmetric matrix (Householder
// tridiagonalization followed by implicit QL). Eigenvalues are returned in
// descending order with matching eigenvector columns.
EigenBasis dense_sym_eig(const DenseSymMatrix& c);

// Extends the orthonormal columns of q with random orthonormal directions
// until it has `columns` columns.
Matrix complete_basis(const Matrix& q, std::size_t columns, Rng& rng);

}  // namespace rsclust
