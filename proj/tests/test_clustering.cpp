#include <cmath>
#include <sstream>

#include "doctest.h"
#include "generators.hpp"
#include "oracles.hpp"
#include "rsclust/clustering.hpp"
#include "rsclust/error.hpp"
#include "rsclust/evaluate.hpp"
#include "rsclust/log.hpp"
#include "rsclust/sbm.hpp"

using namespace rsclust;

TEST_CASE("kmeans: K = n") {
  Matrix x = oracle::dense({{0, 0}, {1, 0}, {5, 5}, {2, 9}});
  Clustering c = kmeans_lloyd(x, 4, {10, 100, 0.0, 1});
  CHECK(c.objective == 0.0);
  std::vector<std::size_t> sorted = c.labels;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("kmeans: two separated clouds") {
  Rng rng(1);
  Matrix x(40, 2);
  double scatter = 0.0;
  for (std::size_t i = 0; i < 40; ++i) {
    const double c = i < 20 ? 0.0 : 10.0;
    x(i, 0) = c + 0.1 * rng.normal();
    x(i, 1) = c + 0.1 * rng.normal();
  }
  for (std::size_t half = 0; half < 2; ++half) {
    double mx = 0, my = 0;
    for (std::size_t i = half * 20; i < half * 20 + 20; ++i) mx += x(i, 0) / 20, my += x(i, 1) / 20;
    for (std::size_t i = half * 20; i < half * 20 + 20; ++i)
      scatter += (x(i, 0) - mx) * (x(i, 0) - mx) + (x(i, 1) - my) * (x(i, 1) - my);
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Clustering c = kmeans_lloyd(x, 2, {5, 300, 0.0, seed});
    CHECK(c.objective == doctest::Approx(scatter).epsilon(1e-10));
    for (std::size_t i = 1; i < 40; ++i) CHECK((c.labels[i] == c.labels[0]) == (i < 20));
  }
}

TEST_CASE("kmeans: 50 restarts reach the exhaustive optimum on 12 points") {
  Rng rng(2);
  for (int trial = 0; trial < 3; ++trial) {
    Matrix x(12, 2);
    for (double& v : x.data()) v = rng.normal();
    const double best = oracle::kmeans_optimum(x, 3);
    Clustering c = kmeans_lloyd(x, 3, {50, 300, 0.0, rng.next()});
    CHECK(c.objective == doctest::Approx(best).epsilon(1e-10));
  }
}

TEST_CASE("kmeans: trace is non-increasing and results are deterministic") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = gen::between(rng, 10, 80), K = gen::between(rng, 2, 5);
    Matrix x(n, 3);
    for (double& v : x.data()) v = rng.normal();
    KMeansOptions opts{8, 300, 0.0, rng.next()};
    Clustering a = kmeans_lloyd(x, K, opts), b = kmeans_lloyd(x, K, opts);
    CHECK(a.labels == b.labels);
    CHECK(a.objective == b.objective);
    for (std::size_t i = 1; i < a.trace.size(); ++i) CHECK(a.trace[i] <= a.trace[i - 1] * (1 + 1e-12));
    for (auto l : a.labels) CHECK(l < K);
    CHECK(a.objective >= 0.0);
  }
}

TEST_CASE("kmeans: argument errors") {
  CHECK_THROWS_AS(kmeans_lloyd(Matrix(2, 2), 3), ParameterError);
  CHECK_THROWS_AS(kmeans_lloyd(Matrix(4, 0), 2), ParameterError);
}

TEST_CASE("normalize_rows") {
  Matrix u = oracle::dense({{3, 4}, {0, 0}});
  Matrix v = normalize_rows(u);
  CHECK(v(0, 0) == doctest::Approx(0.6));
  CHECK(v(0, 1) == doctest::Approx(0.8));
  CHECK(v(1, 0) == 0.0);
  CHECK(v(1, 1) == 0.0);
  Rng rng(4);
  Matrix r(30, 4);
  for (double& x : r.data()) x = rng.normal();
  for (std::size_t j = 0; j < 4; ++j) r(7, j) = 0.0;
  Matrix n = normalize_rows(r);
  for (std::size_t i = 0; i < 30; ++i) {
    const double len = norm2(n.row(i));
    CHECK((std::abs(len) <= 1e-12 || std::abs(len - 1.0) <= 1e-12));
  }
}

namespace {

ClusterOptions options(std::size_t K, std::size_t rank = 0, Variant v = Variant::plain) {
  ClusterOptions o;
  o.K = K;
  o.target_rank = rank;
  o.variant = v;
  o.seed = 5;
  o.kmeans.restarts = 10;
  return o;
}

SamplingConfig p_one() {
  SamplingConfig s;
  s.p = 1.0;
  return s;
}

}  // namespace

TEST_CASE("pipelines on population matrices") {
  SUBCASE("eq47, n = 60") {
    SbmParams p = make_eq47(60, 3, 0.2, 0.5);
    DenseSymMatrix pm = population_matrix(p);
    auto plain = spectral_cluster(as_operator(pm), options(3));
    CHECK(misclassification_l1(plain.clustering.labels, p.g, 3).value == 0.0);
    for (std::uint64_t s = 0; s < 5; ++s) {
      SketchConfig sk;
      sk.seed = s;
      auto rp = rp_spectral_cluster(as_operator(pm), options(3), sk);
      CHECK(misclassification_l1(rp.clustering.labels, p.g, 3).value == 0.0);
    }
    auto rs = rs_spectral_cluster(pm, options(3), p_one());
    CHECK(misclassification_l1(rs.clustering.labels, p.g, 3).value == 0.0);
  }
  SUBCASE("DC-SBM: spherical is exact") {
    Rng rng(6);
    SbmParams p = make_benchmark_model({"model5", 90}, rng);
    DenseSymMatrix pm = population_matrix(p);
    auto sph = spectral_cluster(as_operator(pm), options(3, 0, Variant::spherical));
    CHECK(misclassification_l1(sph.clustering.labels, p.g, 3).value == 0.0);
  }
  SUBCASE("Model 3, rank deficient") {
    Rng rng(7);
    SbmParams p = make_benchmark_model({"model3", 60}, rng);
    DenseSymMatrix pm = population_matrix(p);
    auto r = spectral_cluster(as_operator(pm), options(3, 2));
    CHECK(misclassification_l1(r.clustering.labels, p.g, 3).value == 0.0);
  }
}

TEST_CASE("rs with p = 1 reproduces the plain pipeline") {
  Rng rng(8);
  SbmParams p = make_eq47(150, 3, 0.3, 0.5);
  SparseSymGraph a = sample_sbm(p, rng);
  auto plain = spectral_cluster(as_operator(a), options(3));
  auto rs = rs_spectral_cluster(a, options(3), p_one());
  CHECK(oracle::max_principal_sine(plain.basis.vectors, rs.basis.vectors) <= 1e-6);
  CHECK(misclassification_l1(plain.clustering.labels, rs.clustering.labels, 3).value == 0.0);
}

TEST_CASE("pipelines are seed deterministic") {
  Rng rng(9);
  SbmParams p = make_eq47(120, 3, 0.3, 0.5);
  SparseSymGraph a = sample_sbm(p, rng);
  SketchConfig sk;
  sk.seed = 4;
  SamplingConfig sc;
  sc.seed = 4;
  CHECK(rp_spectral_cluster(as_operator(a), options(3), sk).clustering.labels ==
        rp_spectral_cluster(as_operator(a), options(3), sk).clustering.labels);
  CHECK(rs_spectral_cluster(a, options(3), sc).clustering.labels == rs_spectral_cluster(a, options(3), sc).clustering.labels);
}

TEST_CASE("rp clamps l to n and still returns") {
  Rng rng(10);
  SbmParams p = make_eq47(12, 2, 0.5, 0.5);
  SparseSymGraph a = sample_sbm(p, rng);
  SketchConfig sk;
  sk.oversampling = 20;
  ScopedQuiet quiet;
  auto r = rp_spectral_cluster(as_operator(a), options(2), sk);
  CHECK(r.sketch.clamped);
  CHECK(r.clustering.labels.size() == 12);
}

TEST_CASE("empty sparsified graph surfaces an error") {
  SparseSymGraph a = SparseSymGraph::from_edges(4, {{0, 1, 1.0}});
  SamplingConfig sc;
  sc.p = 1e-9;
  ScopedQuiet quiet;
  CHECK_THROWS_AS(rs_spectral_cluster(a, options(2), sc), Error);
}

TEST_CASE("pipeline option checks") {
  DenseSymMatrix m(5, 1.0);
  CHECK_THROWS_AS(spectral_cluster(as_operator(m), options(2, 3)), ParameterError);
  CHECK_THROWS_AS(spectral_cluster(as_operator(m), options(6)), ParameterError);
  CHECK(parse_variant("spherical") == Variant::spherical);
  CHECK_THROWS_AS(parse_variant("round"), ParameterError);
}

TEST_CASE("clustering serialization") {
  Clustering c;
  c.labels = {1, 0, 1};
  c.objective = 2.5;
  std::vector<std::int64_t> ids = {10, 20, 30};
  nlohmann::json j = clustering_to_json(c, ids);
  CHECK(j["nodes"][2]["id"] == 30);
  CHECK(j["nodes"][2]["label"] == 1);
  CHECK(j["objective"] == 2.5);
  std::ostringstream out;
  write_clustering_csv(out, c, ids);
  CHECK(out.str() == "id,label\n10,1\n20,0\n30,1\n");
  std::vector<std::int64_t> short_ids = {1};
  CHECK_THROWS_AS(write_clustering_csv(out, c, short_ids), DimensionError);
}
