#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rsclust {

// Row-major dense matrix. Blocks of vectors (n x l) are stored so that each
// row of the block is contiguous, which is what sparse row kernels want.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return values_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {values_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }

  std::vector<double> column(std::size_t j) const;
  void set_column(std::size_t j, std::span<const double> v);

  // Keeps the listed columns, in the given order.
  Matrix select_columns(std::span<const std::size_t> columns) const;

  std::span<double> data() noexcept { return values_; }
  std::span<const double> data() const noexcept { return values_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

Matrix transpose(const Matrix& a);
Matrix multiply(const Matrix& a, const Matrix& b);
// aᵀ b without forming the transpose.
Matrix multiply_at_b(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
double frobenius_norm(const Matrix& a);
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

// Symmetric matrix stored once (packed upper triangle) and mirrored on read,
// so values(i, j) == values(j, i) holds bit for bit.
class DenseSymMatrix {
 public:
  DenseSymMatrix() = default;
  explicit DenseSymMatrix(std::size_t n, double fill = 0.0)
      : n_(n), packed_(n * (n + 1) / 2, fill) {}

  // Requires exact symmetry of `full`; throws ParameterError otherwise.
  static DenseSymMatrix from_full(const Matrix& full);
  // Averages the two triangles. Use for numerically symmetric products.
  static DenseSymMatrix symmetrize(const Matrix& full);

  std::size_t dim() const noexcept { return n_; }

  double operator()(std::size_t i, std::size_t j) const { return packed_[index(i, j)]; }
  void set(std::size_t i, std::size_t j, double v) { packed_[index(i, j)] = v; }

  Matrix to_matrix() const;

  // Y = M X for an n x l block.
  Matrix multiply(const Matrix& block) const;

 private:
  std::size_t index(std::size_t i, std::size_t j) const noexcept {
    if (i > j) std::swap(i, j);
    // Row i of the upper triangle starts after rows 0..i-1.
    return i * n_ - i * (i - 1) / 2 + (j - i);
  }

  std::size_t n_ = 0;
  std::vector<double> packed_;
};

// Column-orthonormal block U (n x m) with eigenvalues sorted descending.
struct EigenBasis {
  Matrix vectors;
  std::vector<double> values;

  std::size_t dim() const noexcept { return vectors.rows(); }
  std::size_t size() const noexcept { return values.size(); }
};

// Symmetric low-rank factorization basis * core * basisᵀ. Holds both
// QCQᵀ (random projection) and UΣUᵀ (eigen factors).
struct LowRankFactors {
  Matrix basis;
  Matrix core;

  static LowRankFactors from_eigen(const EigenBasis& e);
  std::size_t dim() const noexcept { return basis.rows(); }
  std::size_t rank() const noexcept { return basis.cols(); }
  Matrix densify() const;
};

}  // namespace rsclust
