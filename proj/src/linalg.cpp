#include "rsclust/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rsclust/error.hpp"
#include "rsclust/log.hpp"

namespace rsclust {

std::size_t QrResult::dropped() const noexcept { return input_columns - kept_columns.size(); }

QrResult qr_orthonormalize(const Matrix& y, double rank_tol, bool quiet) {
  const std::size_t n = y.rows();
  const std::size_t l = y.cols();
  if (n < l) throw DimensionError("qr_orthonormalize: more columns than rows");

  double max_norm = 0.0;
  for (std::size_t j = 0; j < l; ++j) max_norm = std::max(max_norm, norm2(y.column(j)));
  if (!(max_norm > 0.0) || !std::isfinite(max_norm)) throw EmptyRangeError("qr_orthonormalize: input has no range");
  const double threshold = rank_tol * max_norm;

  // Column-major working copy; reflectors touch whole columns.
  std::vector<std::vector<double>> work(l);
  for (std::size_t j = 0; j < l; ++j) work[j] = y.column(j);

  std::vector<std::vector<double>> reflectors;  // v_k, meaningful from row k on
  std::vector<double> betas;
  std::vector<double> diag_sign;
  QrResult result;
  result.input_columns = l;

  for (std::size_t j = 0; j < l; ++j) {
    const std::size_t k = reflectors.size();
    auto& x = work[j];
    const double alpha = norm2(std::span<const double>(x).subspan(k));
    if (alpha <= threshold) continue;

    std::vector<double> v(n, 0.0);
    for (std::size_t i = k; i < n; ++i) v[i] = x[i];
    const double sign = x[k] >= 0.0 ? 1.0 : -1.0;
    v[k] += sign * alpha;
    double vtv = 0.0;
    for (std::size_t i = k; i < n; ++i) vtv += v[i] * v[i];
    const double beta = 2.0 / vtv;

    for (std::size_t c = j + 1; c < l; ++c) {
      auto& col = work[c];
      double s = 0.0;
      for (std::size_t i = k; i < n; ++i) s += v[i] * col[i];
      s *= beta;
      for (std::size_t i = k; i < n; ++i) col[i] -= s * v[i];
    }
    reflectors.push_back(std::move(v));
    betas.push_back(beta);
    diag_sign.push_back(-sign);  // R_kk = -sign * alpha
    result.kept_columns.push_back(j);
  }

  const std::size_t kept = reflectors.size();
  if (kept == 0) throw EmptyRangeError("qr_orthonormalize: all columns are numerically dependent");
  if (kept < l && !quiet) warn("qr_orthonormalize: dropped " + std::to_string(l - kept) + " rank-deficient column(s)");

  // Q = H_0 ... H_{kept-1} [e_0 .. e_{kept-1}], applied right to left.
  std::vector<std::vector<double>> qcols(kept, std::vector<double>(n, 0.0));
  for (std::size_t c = 0; c < kept; ++c) qcols[c][c] = 1.0;
  for (std::size_t r = kept; r-- > 0;) {
    const auto& v = reflectors[r];
    for (std::size_t c = 0; c < kept; ++c) {
      auto& col = qcols[c];
      double s = 0.0;
      for (std::size_t i = r; i < n; ++i) s += v[i] * col[i];
      if (s == 0.0) continue;
      s *= betas[r];
      for (std::size_t i = r; i < n; ++i) col[i] -= s * v[i];
    }
  }
  result.q = Matrix(n, kept);
  for (std::size_t c = 0; c < kept; ++c) {
    const double s = diag_sign[c] < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) result.q(i, c) = s * qcols[c][i];
  }
  return result;
}

namespace {

// Householder reduction to tridiagonal form. On exit v holds the
// accumulated transformation, d the diagonal and e the subdiagonal in
// e[1..n-1].
void tridiagonalize(Matrix& v, std::vector<double>& d, std::vector<double>& e) {
  const std::size_t n = v.rows();
  for (std::size_t j = 0; j < n; ++j) d[j] = v(n - 1, j);

  for (std::size_t i = n - 1; i > 0; --i) {
    double scale = 0.0, h = 0.0;
    for (std::size_t k = 0; k < i; ++k) scale += std::abs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (std::size_t j = 0; j < i; ++j) {
        d[j] = v(i - 1, j);
        v(i, j) = 0.0;
        v(j, i) = 0.0;
      }
    } else {
      for (std::size_t k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (std::size_t j = 0; j < i; ++j) e[j] = 0.0;

      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        v(j, i) = f;
        g = e[j] + v(j, j) * f;
        for (std::size_t k = j + 1; k <= i - 1; ++k) {
          g += v(k, j) * d[k];
          e[k] += v(k, j) * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const double hh = f / (h + h);
      for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        for (std::size_t k = j; k <= i - 1; ++k) v(k, j) -= (f * e[k] + g * d[k]);
        d[j] = v(i - 1, j);
        v(i, j) = 0.0;
      }
    }
    d[i] = h;
  }

  for (std::size_t i = 0; i + 1 < n; ++i) {
    v(n - 1, i) = v(i, i);
    v(i, i) = 1.0;
    const double h = d[i + 1];
    if (h != 0.0) {
      for (std::size_t k = 0; k <= i; ++k) d[k] = v(k, i + 1) / h;
      for (std::size_t j = 0; j <= i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k <= i; ++k) g += v(k, i + 1) * v(k, j);
        for (std::size_t k = 0; k <= i; ++k) v(k, j) -= g * d[k];
      }
    }
    for (std::size_t k = 0; k <= i; ++k) v(k, i + 1) = 0.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    d[j] = v(n - 1, j);
    v(n - 1, j) = 0.0;
  }
  v(n - 1, n - 1) = 1.0;
  e[0] = 0.0;
}

// Implicit QL iterations on the tridiagonal (d, e), accumulating rotations
// into v.
void tridiagonal_ql(Matrix& v, std::vector<double>& d, std::vector<double>& e) {
  const std::size_t n = v.rows();
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;

  double f = 0.0, tst1 = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  const std::size_t max_sweeps = 60 * n + 60;
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    std::size_t m = l;
    while (m < n) {
      if (std::abs(e[m]) <= eps * tst1) break;
      ++m;
    }
    if (m == n) m = n - 1;
    if (m > l) {
      std::size_t iter = 0;
      do {
        if (++iter > max_sweeps) throw ConvergenceError("dense_sym_eig: QL iteration did not converge", d, iter);
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0, c2 = c, c3 = c;
        const double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (std::size_t i = m; i-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[i];
          h = c * p;
          r = std::hypot(p, e[i]);
          e[i + 1] = s * r;
          s = e[i] / r;
          c = p / r;
          p = c * d[i] - s * g;
          d[i + 1] = h + s * (c * g + s * d[i]);
          for (std::size_t k = 0; k < n; ++k) {
            h = v(k, i + 1);
            v(k, i + 1) = s * v(k, i) + c * h;
            v(k, i) = c * v(k, i) - s * h;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }
}

}  // namespace

EigenBasis dense_sym_eig(const DenseSymMatrix& c) {
  const std::size_t n = c.dim();
  EigenBasis out;
  if (n == 0) return out;
  Matrix v = c.to_matrix();
  for (double x : v.data())
    if (!std::isfinite(x)) throw ParameterError("dense_sym_eig: non-finite entry");

  std::vector<double> d(n), e(n);
  if (n == 1) {
    out.values = {v(0, 0)};
    out.vectors = Matrix::identity(1);
    return out;
  }
  tridiagonalize(v, d, e);
  tridiagonal_ql(v, d, e);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });
  out.vectors = v.select_columns(order);
  out.values.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.values[k] = d[order[k]];
  return out;
}

Matrix complete_basis(const Matrix& q, std::size_t columns, Rng& rng) {
  const std::size_t n = q.rows();
  if (columns > n) throw DimensionError("complete_basis: more columns than the dimension");
  std::vector<std::vector<double>> cols;
  for (std::size_t j = 0; j < q.cols(); ++j) cols.push_back(q.column(j));
  while (cols.size() < columns) {
    std::vector<double> x(n);
    for (double& xi : x) xi = rng.normal();
    // Two passes of Gram-Schmidt.
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& c : cols) {
        const double s = dot(c, x);
        for (std::size_t i = 0; i < n; ++i) x[i] -= s * c[i];
      }
    const double nx = norm2(x);
    if (nx < 1e-8) continue;
    for (double& xi : x) xi /= nx;
    cols.push_back(std::move(x));
  }
  Matrix out(n, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) out.set_column(j, cols[j]);
  return out;
}

}  // namespace rsclust
