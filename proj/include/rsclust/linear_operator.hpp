#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "rsclust/dense.hpp"
#include "rsclust/graph.hpp"
#include "rsclust/random.hpp"

namespace rsclust {

// A symmetric linear map applied to blocks of vectors. Operators built from
// a matrix keep a reference to it; the matrix must outlive the operator.
class SymOperator {
 public:
  using BlockApply = std::function<Matrix(const Matrix&)>;

  SymOperator(std::size_t dim, BlockApply apply) : dim_(dim), apply_(std::move(apply)) {}

  std::size_t dim() const noexcept { return dim_; }

  // Y = A X for an n x l block.
  Matrix apply(const Matrix& block) const;
  std::vector<double> apply(std::span<const double> x) const;

  // Materializes the operator by applying it to the identity.
  Matrix densify() const;

 private:
  std::size_t dim_;
  BlockApply apply_;
};

SymOperator as_operator(const SparseSymGraph& g);
SymOperator as_operator(const DenseSymMatrix& m);
SymOperator as_operator(const LowRankFactors& f);
SymOperator as_operator(SparseSymGraph&&) = delete;
SymOperator as_operator(DenseSymMatrix&&) = delete;
SymOperator as_operator(LowRankFactors&&) = delete;

SymOperator scaled(SymOperator a, double c);
// x -> A x - B x.
SymOperator difference(SymOperator a, SymOperator b);

// x -> basis * core * (basisᵀ x) - P x, without forming the n x n product.
SymOperator residual_operator(const LowRankFactors& approx, const DenseSymMatrix& population);
SymOperator residual_operator(const EigenBasis& approx, const DenseSymMatrix& population);
SymOperator residual_operator(const LowRankFactors& approx, SymOperator population);

struct NormOptions {
  double tol = 1e-10;
  std::size_t max_iter = 20000;
};

// Largest absolute eigenvalue of a symmetric operator, by power iteration
// from a random start. Switches to a two-dimensional subspace iteration with
// Rayleigh-Ritz extraction when the Rayleigh quotient keeps flipping sign
// (two dominant eigenvalues of opposite sign). Throws ConvergenceError
// carrying the last estimate after max_iter iterations.
double operator_norm(const SymOperator& op, const NormOptions& options, Rng& rng);

}  // namespace rsclust
