#include "rsclust/dense.hpp"

#include <cmath>

#include "rsclust/error.hpp"

namespace rsclust {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::vector<double> Matrix::column(std::size_t j) const {
  std::vector<double> v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
  return v;
}

void Matrix::set_column(std::size_t j, std::span<const double> v) {
  if (v.size() != rows_) throw DimensionError("set_column: length mismatch");
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

Matrix Matrix::select_columns(std::span<const std::size_t> columns) const {
  Matrix out(rows_, columns.size());
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t c = 0; c < columns.size(); ++c) out(i, c) = (*this)(i, columns[c]);
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("multiply: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out[j] += aik * brow[j];
    }
  }
  return c;
}

Matrix multiply_at_b(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("multiply_at_b: row counts differ");
  Matrix c(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto arow = a.row(k);
    auto brow = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = arow[i];
      if (aki == 0.0) continue;
      auto out = c.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) out[j] += aki * brow[j];
    }
  }
  return c;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("subtract: shape mismatch");
  Matrix c = a;
  auto cd = c.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < cd.size(); ++i) cd[i] -= bd[i];
  return c;
}

double frobenius_norm(const Matrix& a) { return norm2(a.data()); }

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) {
  // Scaled accumulation avoids overflow for large entries.
  double scale = 0.0, ssq = 1.0;
  for (double x : a) {
    if (x == 0.0) continue;
    const double ax = std::abs(x);
    if (scale < ax) {
      ssq = 1.0 + ssq * (scale / ax) * (scale / ax);
      scale = ax;
    } else {
      ssq += (ax / scale) * (ax / scale);
    }
  }
  return scale * std::sqrt(ssq);
}

DenseSymMatrix DenseSymMatrix::from_full(const Matrix& full) {
  if (full.rows() != full.cols()) throw DimensionError("DenseSymMatrix: matrix is not square");
  const std::size_t n = full.rows();
  DenseSymMatrix s(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      if (full(i, j) != full(j, i)) throw ParameterError("DenseSymMatrix: matrix is not symmetric");
      s.set(i, j, full(i, j));
    }
  return s;
}

DenseSymMatrix DenseSymMatrix::symmetrize(const Matrix& full) {
  if (full.rows() != full.cols()) throw DimensionError("DenseSymMatrix: matrix is not square");
  const std::size_t n = full.rows();
  DenseSymMatrix s(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) s.set(i, j, 0.5 * (full(i, j) + full(j, i)));
  return s;
}

Matrix DenseSymMatrix::to_matrix() const {
  Matrix m(n_, n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) m(i, j) = (*this)(i, j);
  return m;
}

Matrix DenseSymMatrix::multiply(const Matrix& block) const {
  if (block.rows() != n_) throw DimensionError("DenseSymMatrix::multiply: dimension mismatch");
  Matrix out(n_, block.cols());
  // Row-major accumulation in fixed column order keeps results reproducible.
  for (std::size_t i = 0; i < n_; ++i) {
    auto y = out.row(i);
    for (std::size_t j = 0; j < n_; ++j) {
      const double m = (*this)(i, j);
      if (m == 0.0) continue;
      auto x = block.row(j);
      for (std::size_t c = 0; c < y.size(); ++c) y[c] += m * x[c];
    }
  }
  return out;
}

LowRankFactors LowRankFactors::from_eigen(const EigenBasis& e) {
  LowRankFactors f;
  f.basis = e.vectors;
  f.core = Matrix(e.size(), e.size());
  for (std::size_t k = 0; k < e.size(); ++k) f.core(k, k) = e.values[k];
  return f;
}

Matrix LowRankFactors::densify() const {
  return multiply(multiply(basis, core), transpose(basis));
}

}  // namespace rsclust
