#include <cmath>

#include "doctest.h"
#include "generators.hpp"
#include "oracles.hpp"
#include "rsclust/error.hpp"
#include "rsclust/log.hpp"
#include "rsclust/sample_eig.hpp"
#include "rsclust/sbm.hpp"

using namespace rsclust;

namespace {

SamplingConfig uniform_p(double p) {
  SamplingConfig cfg;
  cfg.p = p;
  return cfg;
}

}  // namespace

TEST_CASE("sparsify: p = 1 is the identity") {
  Rng rng(1);
  auto a = gen::erdos_renyi(rng, 40, 0.3);
  CHECK(sparsify(a, uniform_p(1.0), rng) == a);
}

TEST_CASE("sparsify: single edge at p = 0.5") {
  SparseSymGraph a = SparseSymGraph::from_edges(2, {{0, 1, 1.0}});
  int present = 0;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    Rng rng(s);
    SparseSymGraph t = sparsify(a, uniform_p(0.5), rng);
    if (t.num_edges() == 1) {
      ++present;
      CHECK(t.weight(0, 1) == 2.0);
      CHECK(t.weight(1, 0) == 2.0);
    }
  }
  CHECK(std::abs(present - 5000) <= 4 * 50);
}

TEST_CASE("sparsify: expected edge count and weights") {
  Rng rng(2);
  auto a = gen::erdos_renyi(rng, 300, 0.1);
  const double m = static_cast<double>(a.num_edges());
  SparseSymGraph t = sparsify(a, uniform_p(0.7), rng);
  CHECK(std::abs(t.num_edges() - 0.7 * m) <= 4 * std::sqrt(m * 0.7 * 0.3));
  for (const Edge& e : t.edges()) {
    CHECK(a.weight(e.i, e.j) == 1.0);  // only existing edges survive
    CHECK(e.w == doctest::Approx(1.0 / 0.7).epsilon(1e-15));
  }
}

TEST_CASE("sparsify: larger p keeps a superset for a fixed stream") {
  Rng g(3);
  auto a = gen::erdos_renyi(g, 80, 0.2);
  Rng r1(9), r2(9);
  SparseSymGraph lo = sparsify(a, uniform_p(0.5), r1), hi = sparsify(a, uniform_p(0.8), r2);
  for (const Edge& e : lo.edges()) CHECK(hi.weight(e.i, e.j) > 0.0);
}

TEST_CASE("sparsify: invalid probabilities") {
  Rng rng(4);
  auto a = gen::erdos_renyi(rng, 10, 0.5);
  CHECK_THROWS_AS(sparsify(a, uniform_p(0.0), rng), ParameterError);
  CHECK_THROWS_AS(sparsify(a, uniform_p(1.5), rng), ParameterError);
  CHECK_THROWS_AS(sparsify(a, [](std::size_t, std::size_t) { return -0.1; }, rng), ParameterError);
}

TEST_CASE("sparsify: dense variant covers the diagonal") {
  DenseSymMatrix p(3, 0.4);
  Rng rng(5);
  DenseSymMatrix t = sparsify(p, uniform_p(1.0), rng);
  CHECK(t.to_matrix() == p.to_matrix());
  SamplingConfig row;
  row.mode = SamplingMode::row_norm;
  CHECK_THROWS_AS(sparsify(p, row, rng), ParameterError);
}

TEST_CASE("row_norm_probs") {
  SUBCASE("regular graph gives the target everywhere") {
    std::vector<Edge> ring;
    for (std::size_t i = 0; i < 12; ++i) ring.push_back({i, (i + 1) % 12, 1.0});
    for (auto& e : ring)
      if (e.i > e.j) std::swap(e.i, e.j);
    SparseSymGraph a = SparseSymGraph::from_edges(12, ring);
    auto p = row_norm_probs(a, 0.05, 0.7);
    for (const Edge& e : a.edges()) CHECK(p(e.i, e.j) == doctest::Approx(0.7).epsilon(1e-9));
  }
  SUBCASE("star: hub edges get the largest probability") {
    std::vector<Edge> star;
    for (std::size_t i = 1; i < 10; ++i) star.push_back({0, i, 1.0});
    std::vector<Edge> extra = {{1, 2, 1.0}};
    star.insert(star.end(), extra.begin(), extra.end());
    SparseSymGraph a = SparseSymGraph::from_edges(10, star);
    auto p = row_norm_probs(a, 0.05, 0.5);
    CHECK(p(0, 3) >= p(1, 2));
    CHECK(p(0, 3) == p(0, 5));
  }
  SUBCASE("random graph: realized mean within 1% of target") {
    Rng rng(6);
    auto a = gen::erdos_renyi(rng, 200, 0.05);
    auto p = row_norm_probs(a, 0.05, 0.7);
    double mean = 0.0;
    auto edges = a.edges();
    for (const Edge& e : edges) mean += p(e.i, e.j);
    mean /= static_cast<double>(edges.size());
    CHECK(std::abs(mean - 0.7) <= 0.007);
    for (const Edge& e : edges) CHECK((p(e.i, e.j) >= 0.05 && p(e.i, e.j) <= 1.0));
  }
  SUBCASE("empty graph") { CHECK_THROWS_AS(row_norm_probs(SparseSymGraph::from_edges(3, {}), 0.05, 0.7), ParameterError); }
}

TEST_CASE("sparsifier is unbiased elementwise") {
  Rng g(7);
  auto a = gen::erdos_renyi(g, 12, 0.4);
  const int R = 10000;
  Matrix sum(12, 12);
  for (int s = 0; s < R; ++s) {
    Rng rng(50000 + s);
    Matrix t = sparsify(a, uniform_p(0.5), rng).densify();
    for (std::size_t i = 0; i < sum.data().size(); ++i) sum.data()[i] += t.data()[i];
  }
  Matrix dense = a.densify();
  const double se = std::sqrt(1.0 / R);  // entry is 2 w.p. 1/2: sd 1
  for (std::size_t i = 0; i < sum.data().size(); ++i) CHECK(std::abs(sum.data()[i] / R - dense.data()[i]) <= 4 * se);
}

TEST_CASE("subspace_iteration") {
  Rng rng(8);
  SUBCASE("diagonal") {
    DenseSymMatrix d(6);
    const double diag[] = {9, 5, 1, 0, 0, 0};
    for (std::size_t i = 0; i < 6; ++i) d.set(i, i, diag[i]);
    EigenBasis e = subspace_iteration(as_operator(d), 2, {}, rng);
    CHECK(e.values[0] == doctest::Approx(9.0).epsilon(1e-12));
    CHECK(e.values[1] == doctest::Approx(5.0).epsilon(1e-12));
  }
  SUBCASE("exact rank converges quickly") {
    Matrix a = gen::with_spectrum(rng, 50, {3.0, 2.0});
    DenseSymMatrix m = DenseSymMatrix::from_full(a);
    SubspaceOptions opts;
    opts.tol = 1e-10;
    opts.max_iter = 3;
    ScopedQuiet quiet;
    EigenBasis e = subspace_iteration(as_operator(m), 2, opts, rng);
    CHECK(e.values[0] == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(e.values[1] == doctest::Approx(2.0).epsilon(1e-10));
  }
  SUBCASE("random 80x80 with a gap vs Jacobi") {
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> spec = {10, 8, 6, 3};
      for (int k = 0; k < 40; ++k) spec.push_back(gen::uniform(rng, -2.0, 2.0));
      Matrix a = gen::with_spectrum(rng, 80, spec);
      DenseSymMatrix m = DenseSymMatrix::from_full(a);
      EigenBasis e = subspace_iteration(as_operator(m), 3, {}, rng);
      oracle::Eig ref = oracle::jacobi(a);
      for (std::size_t k = 0; k < 3; ++k) CHECK(e.values[k] == doctest::Approx(ref.values[k]).epsilon(1e-6));
      CHECK(oracle::max_principal_sine(e.vectors, ref.vectors.select_columns(std::vector<std::size_t>{0, 1, 2})) <= 1e-4);
    }
  }
  SUBCASE("non-convergence carries the last Ritz values") {
    Matrix a = gen::with_spectrum(rng, 40, {1.0, 0.99999, 0.99998, 0.5});
    DenseSymMatrix m = DenseSymMatrix::from_full(a);
    SubspaceOptions opts;
    opts.tol = 1e-15;
    opts.max_iter = 2;
    opts.extra = 0;
    try {
      subspace_iteration(as_operator(m), 1, opts, rng);
      FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
      CHECK(e.last_values().size() == 1);
    }
  }
  SUBCASE("argument checks") {
    DenseSymMatrix m(4, 1.0);
    CHECK_THROWS_AS(subspace_iteration(as_operator(m), 0, {}, rng), ParameterError);
    CHECK_THROWS_AS(subspace_iteration(as_operator(m), 5, {}, rng), ParameterError);
  }
}

TEST_CASE("rs_low_rank") {
  SUBCASE("p = 1 on a population matrix recovers it") {
    SbmParams p = make_eq47(60, 3, 0.3, 0.5);
    DenseSymMatrix pm = population_matrix(p);
    Rng rng(9);
    RsDenseResult r = rs_low_rank(pm, uniform_p(1.0), 3, rng);
    Matrix rec = LowRankFactors::from_eigen(r.basis).densify();
    CHECK(frobenius_norm(subtract(rec, pm.to_matrix())) <= 1e-8);
  }
  SUBCASE("sparsified weights are 1/p on surviving edges") {
    Rng rng(10);
    auto a = gen::erdos_renyi(rng, 100, 0.1);
    RsResult r = rs_low_rank(a, uniform_p(0.6), 2, rng);
    for (const Edge& e : r.sparsified.edges()) {
      CHECK(a.weight(e.i, e.j) == 1.0);
      CHECK(e.w == doctest::Approx(1.0 / 0.6));
    }
    CHECK(r.basis.size() == 2);
  }
}
