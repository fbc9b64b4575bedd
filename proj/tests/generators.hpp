#pragma once

// Hand-rolled random instance generators for property tests.

#include <cmath>
#include <cstddef>
#include <vector>

#include "rsclust/dense.hpp"
#include "rsclust/graph.hpp"
#include "rsclust/linalg.hpp"
#include "rsclust/random.hpp"
#include "rsclust/sbm.hpp"

namespace gen {

using rsclust::Matrix;
using rsclust::Rng;

inline std::size_t between(Rng& rng, std::size_t lo, std::size_t hi) { return lo + rng.below(hi - lo + 1); }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

inline Matrix symmetric(Rng& rng, std::size_t n) {
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) a(i, j) = a(j, i) = rng.normal();
  return a;
}

inline Matrix orthonormal(Rng& rng, std::size_t n, std::size_t k) {
  Matrix y(n, k);
  for (double& v : y.data()) v = rng.normal();
  return rsclust::qr_orthonormalize(y, rsclust::kQrRankTol, true).q;
}

// V diag(values) Vᵀ with a random orthonormal V.
inline Matrix with_spectrum(Rng& rng, std::size_t n, const std::vector<double>& values) {
  const Matrix v = orthonormal(rng, n, values.size());
  Matrix vd = v;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < values.size(); ++k) vd(i, k) *= values[k];
  Matrix a = rsclust::multiply(vd, rsclust::transpose(v));
  return rsclust::DenseSymMatrix::symmetrize(a).to_matrix();
}

inline rsclust::SparseSymGraph erdos_renyi(Rng& rng, std::size_t n, double p, bool weighted = false) {
  std::vector<rsclust::Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.uniform() < p) edges.push_back({i, j, weighted ? uniform(rng, 0.5, 2.0) : 1.0});
  return rsclust::SparseSymGraph::from_edges(n, std::move(edges));
}

inline std::vector<std::size_t> sizes(Rng& rng, std::size_t K, std::size_t lo, std::size_t hi) {
  std::vector<std::size_t> s(K);
  for (auto& v : s) v = between(rng, lo, hi);
  return s;
}

// Assortative B with distinct diagonal dominance.
inline Matrix assortative_b(Rng& rng, std::size_t K) {
  Matrix b(K, K);
  for (std::size_t k = 0; k < K; ++k) b(k, k) = uniform(rng, 0.4, 0.9);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = k + 1; l < K; ++l) b(k, l) = b(l, k) = uniform(rng, 0.0, 0.2);
  return b;
}

// Random labels in [0, K) with every label used.
inline std::vector<std::size_t> labels(Rng& rng, std::size_t n, std::size_t K) {
  std::vector<std::size_t> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = i < K ? i : rng.below(K);
  for (std::size_t i = n; i > 1; --i) std::swap(g[i - 1], g[rng.below(i)]);
  return g;
}

}  // namespace gen
