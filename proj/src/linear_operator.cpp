#include "rsclust/linear_operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "rsclust/error.hpp"
#include "rsclust/linalg.hpp"

namespace rsclust {

Matrix SymOperator::apply(const Matrix& block) const {
  if (block.rows() != dim_) throw DimensionError("SymOperator::apply: block rows do not match dimension");
  return apply_(block);
}

std::vector<double> SymOperator::apply(std::span<const double> x) const {
  if (x.size() != dim_) throw DimensionError("SymOperator::apply: vector length does not match dimension");
  Matrix block(dim_, 1);
  for (std::size_t i = 0; i < dim_; ++i) block(i, 0) = x[i];
  Matrix y = apply_(block);
  return y.column(0);
}

Matrix SymOperator::densify() const { return apply(Matrix::identity(dim_)); }

SymOperator as_operator(const SparseSymGraph& g) {
  return SymOperator(g.num_nodes(), [&g](const Matrix& x) { return matvec(g, x); });
}

SymOperator as_operator(const DenseSymMatrix& m) {
  return SymOperator(m.dim(), [&m](const Matrix& x) { return m.multiply(x); });
}

SymOperator as_operator(const LowRankFactors& f) {
  if (f.core.rows() != f.rank() || f.core.cols() != f.rank())
    throw DimensionError("as_operator: core size does not match basis rank");
  return SymOperator(f.dim(), [&f](const Matrix& x) {
    return multiply(f.basis, multiply(f.core, multiply_at_b(f.basis, x)));
  });
}

SymOperator scaled(SymOperator a, double c) {
  const std::size_t n = a.dim();
  return SymOperator(n, [a = std::move(a), c](const Matrix& x) {
    Matrix y = a.apply(x);
    for (double& v : y.data()) v *= c;
    return y;
  });
}

SymOperator difference(SymOperator a, SymOperator b) {
  if (a.dim() != b.dim()) throw DimensionError("difference: operator dimensions differ");
  const std::size_t n = a.dim();
  return SymOperator(n, [a = std::move(a), b = std::move(b)](const Matrix& x) {
    return subtract(a.apply(x), b.apply(x));
  });
}

SymOperator residual_operator(const LowRankFactors& approx, SymOperator population) {
  if (approx.dim() != population.dim()) throw DimensionError("residual_operator: dimensions differ");
  return difference(as_operator(approx), std::move(population));
}

SymOperator residual_operator(const LowRankFactors& approx, const DenseSymMatrix& population) {
  return residual_operator(approx, as_operator(population));
}

SymOperator residual_operator(const EigenBasis& approx, const DenseSymMatrix& population) {
  if (approx.dim() != population.dim()) throw DimensionError("residual_operator: dimensions differ");
  auto factors = std::make_shared<LowRankFactors>(LowRankFactors::from_eigen(approx));
  const std::size_t n = population.dim();
  return SymOperator(n, [factors, &population](const Matrix& x) {
    return subtract(as_operator(*factors).apply(x), population.multiply(x));
  });
}

namespace {

constexpr double kRoundoffFloor = 64 * std::numeric_limits<double>::epsilon();

// Successive estimates of a monotone sequence converging geometrically;
// decides when the remaining error is below tol.
struct ConvergenceTracker {
  double tol;
  double estimate = 0.0;
  double previous_change = std::numeric_limits<double>::infinity();

  bool update(double next) {
    const double change = next > 0.0 ? std::abs(next - estimate) / next : 0.0;
    const bool have_previous = estimate > 0.0;
    estimate = next;
    const double ratio = previous_change > 0.0 ? change / previous_change : 0.0;
    previous_change = change;
    if (!have_previous) return false;
    if (change <= kRoundoffFloor) return true;
    // Geometric tail: remaining error ~ change * ratio / (1 - ratio).
    return change <= tol && ratio < 1.0 && change * ratio / (1.0 - ratio) <= tol;
  }
};

double block_norm(const SymOperator& op, Matrix x, const NormOptions& options, Rng& rng, std::size_t used) {
  ConvergenceTracker tracker{options.tol};
  for (std::size_t it = used; it < options.max_iter; ++it) {
    Matrix y = op.apply(x);
    Matrix h = multiply_at_b(x, y);
    EigenBasis ritz = dense_sym_eig(DenseSymMatrix::symmetrize(h));
    double est = 0.0;
    for (double v : ritz.values) est = std::max(est, std::abs(v));
    if (est == 0.0 && frobenius_norm(y) == 0.0) return 0.0;
    if (tracker.update(est)) return est;
    try {
      x = qr_orthonormalize(y, kQrRankTol, true).q;
    } catch (const EmptyRangeError&) {
      return est;
    }
    if (x.cols() < 2) x = complete_basis(x, 2, rng);
  }
  throw ConvergenceError("operator_norm: no convergence", {tracker.estimate}, options.max_iter);
}

}  // namespace

double operator_norm(const SymOperator& op, const NormOptions& options, Rng& rng) {
  if (!(options.tol > 0.0)) throw ParameterError("operator_norm: tol must be positive");
  const std::size_t n = op.dim();
  if (n == 0) return 0.0;

  Matrix x(n, 1);
  for (double& v : x.data()) v = rng.normal();
  {
    const double nx = frobenius_norm(x);
    for (double& v : x.data()) v /= nx;
  }

  ConvergenceTracker tracker{options.tol};
  double previous_rq = 0.0;
  int sign_flips = 0;
  for (std::size_t it = 0; it < options.max_iter; ++it) {
    Matrix y = op.apply(x);
    const double ny = frobenius_norm(y);
    if (ny == 0.0) return 0.0;
    if (tracker.update(ny)) return ny;

    const double rq = dot(x.data(), y.data());
    sign_flips = previous_rq * rq < 0.0 ? sign_flips + 1 : 0;
    previous_rq = rq;
    if (sign_flips >= 3 && n >= 2) {
      Matrix block(n, 2);
      for (std::size_t i = 0; i < n; ++i) {
        block(i, 0) = y(i, 0) / ny;
        block(i, 1) = rng.normal();
      }
      block = qr_orthonormalize(block, kQrRankTol, true).q;
      if (block.cols() < 2) block = complete_basis(block, 2, rng);
      return block_norm(op, std::move(block), options, rng, it);
    }
    for (std::size_t i = 0; i < n; ++i) x(i, 0) = y(i, 0) / ny;
  }
  throw ConvergenceError("operator_norm: no convergence", {tracker.estimate}, options.max_iter);
}

}  // namespace rsclust
