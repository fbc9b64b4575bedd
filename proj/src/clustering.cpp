#include "rsclust/clustering.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "rsclust/error.hpp"
#include "rsclust/linalg.hpp"

namespace rsclust {

Variant parse_variant(std::string_view name) {
  if (name == "plain") return Variant::plain;
  if (name == "spherical") return Variant::spherical;
  throw ParameterError("unknown variant '" + std::string(name) + "'");
}

std::string_view to_string(Variant v) { return v == Variant::plain ? "plain" : "spherical"; }

Backend parse_backend(std::string_view name) {
  if (name == "exact") return Backend::exact;
  if (name == "dense") return Backend::dense;
  throw ParameterError("unknown eigensolver backend '" + std::string(name) + "'");
}

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

Matrix kmeanspp(const Matrix& x, std::size_t K, Rng& rng) {
  const std::size_t n = x.rows(), d = x.cols();
  Matrix centers(K, d);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::size_t pick = rng.below(n);
  for (std::size_t c = 0; c < K; ++c) {
    if (c > 0) {
      double total = 0.0;
      for (double b : best) total += b;
      if (total > 0.0) {
        double target = rng.uniform() * total;
        pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
          target -= best[i];
          if (target < 0.0 && best[i] > 0.0) {
            pick = i;
            break;
          }
        }
        while (best[pick] == 0.0) --pick;  // rounding left target >= 0
      } else {
        pick = rng.below(n);  // every point coincides with a center
      }
    }
    auto row = x.row(pick);
    std::copy(row.begin(), row.end(), centers.row(c).begin());
    for (std::size_t i = 0; i < n; ++i) best[i] = std::min(best[i], sq_dist(x.row(i), centers.row(c)));
  }
  return centers;
}

void update_centroids(const Matrix& x, const std::vector<std::size_t>& labels, Matrix& centers) {
  const std::size_t K = centers.rows(), d = centers.cols();
  Matrix sums(K, d);
  std::vector<std::size_t> counts(K, 0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto s = sums.row(labels[i]);
    auto r = x.row(i);
    for (std::size_t c = 0; c < d; ++c) s[c] += r[c];
    ++counts[labels[i]];
  }
  for (std::size_t k = 0; k < K; ++k)
    if (counts[k] > 0)
      for (std::size_t c = 0; c < d; ++c) centers(k, c) = sums(k, c) / static_cast<double>(counts[k]);
}

double objective_of(const Matrix& x, const std::vector<std::size_t>& labels, const Matrix& centers) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) s += sq_dist(x.row(i), centers.row(labels[i]));
  return s;
}

// Moves the point farthest from its centroid into each empty cluster.
void repair_empty(const Matrix& x, std::vector<std::size_t>& labels, Matrix& centers) {
  const std::size_t K = centers.rows();
  std::vector<std::size_t> counts(K, 0);
  for (std::size_t l : labels) ++counts[l];
  for (std::size_t k = 0; k < K; ++k) {
    if (counts[k] > 0) continue;
    std::size_t far = x.rows();
    double far_d = -1.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      if (counts[labels[i]] <= 1) continue;
      const double dd = sq_dist(x.row(i), centers.row(labels[i]));
      if (dd > far_d) {
        far_d = dd;
        far = i;
      }
    }
    if (far == x.rows()) continue;  // cannot happen while n >= K
    --counts[labels[far]];
    labels[far] = k;
    counts[k] = 1;
    auto r = x.row(far);
    std::copy(r.begin(), r.end(), centers.row(k).begin());
  }
}

Clustering lloyd_once(const Matrix& x, std::size_t K, const KMeansOptions& options, Rng& rng) {
  const std::size_t n = x.rows();
  Clustering out;
  out.centroids = kmeanspp(x, K, rng);
  out.labels.assign(n, K);  // sentinel: first pass always changes something
  for (std::size_t it = 0; it < options.max_iter; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < K; ++k) {
        const double dd = sq_dist(x.row(i), out.centroids.row(k));
        if (dd < best_d) {
          best_d = dd;
          best = k;
        }
      }
      if (out.labels[i] != best) {
        out.labels[i] = best;
        changed = true;
      }
    }
    if (!changed) {
      out.converged = true;
      break;
    }
    repair_empty(x, out.labels, out.centroids);
    update_centroids(x, out.labels, out.centroids);
    const double obj = objective_of(x, out.labels, out.centroids);
    out.trace.push_back(obj);
    out.n_iter = it + 1;
    if (options.tol > 0.0 && out.trace.size() >= 2) {
      const double prev = out.trace[out.trace.size() - 2];
      if (prev - obj <= options.tol * prev) {
        out.converged = true;
        break;
      }
    }
  }
  out.objective = objective_of(x, out.labels, out.centroids);
  return out;
}

}  // namespace

Clustering kmeans_lloyd(const Matrix& points, std::size_t K, const KMeansOptions& options) {
  const std::size_t n = points.rows();
  if (K == 0) throw ParameterError("kmeans: K must be at least 1");
  if (n < K) throw ParameterError("kmeans: fewer points (" + std::to_string(n) + ") than clusters (" + std::to_string(K) + ")");
  if (points.cols() == 0) throw ParameterError("kmeans: points have no coordinates");
  if (options.restarts == 0) throw ParameterError("kmeans: restarts must be at least 1");
  for (double v : points.data())
    if (!std::isfinite(v)) throw ParameterError("kmeans: non-finite coordinate");

  Clustering best;
  for (std::size_t r = 0; r < options.restarts; ++r) {
    Rng rng(derive_seed(options.seed, {r}));
    Clustering c = lloyd_once(points, K, options, rng);
    c.restart = r;
    if (r == 0 || c.objective < best.objective) best = std::move(c);
  }
  return best;
}

Matrix normalize_rows(const Matrix& u) {
  Matrix out = u;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    const double nr = norm2(r);
    if (nr < 1e-12) continue;
    for (double& v : r) v /= nr;
  }
  return out;
}

namespace {

KMeansOptions kmeans_for(const ClusterOptions& options) {
  KMeansOptions k = options.kmeans;
  k.seed = derive_seed(options.seed, {hash_tag("kmeans")});
  return k;
}

Rng eigen_rng(const ClusterOptions& options) { return Rng(derive_seed(options.seed, {hash_tag("eigensolver")})); }

class Stopwatch {
 public:
  double lap_ms() {
    const auto now = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - start_).count();
    start_ = now;
    return ms;
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void check_ranks(const ClusterOptions& options, std::size_t n) {
  if (options.K == 0) throw ParameterError("K must be at least 1");
  if (options.rank() > options.K) throw ParameterError("target rank K' cannot exceed K");
  if (options.K > n) throw ParameterError("K exceeds the number of nodes");
}

}  // namespace

Clustering cluster_rows(const EigenBasis& basis, const ClusterOptions& options) {
  const Matrix& u = basis.vectors;
  if (options.variant == Variant::spherical) return kmeans_lloyd(normalize_rows(u), options.K, kmeans_for(options));
  return kmeans_lloyd(u, options.K, kmeans_for(options));
}

SpectralResult spectral_cluster(const SymOperator& a, const ClusterOptions& options) {
  check_ranks(options, a.dim());
  SpectralResult out;
  Stopwatch sw;
  if (options.backend == Backend::dense) {
    EigenBasis full = dense_sym_eig(DenseSymMatrix::symmetrize(a.densify()));
    const auto keep = leading_indices(full.values, options.rank(), options.eigensolver.selection);
    out.basis.vectors = full.vectors.select_columns(keep);
    for (std::size_t k : keep) out.basis.values.push_back(full.values[k]);
  } else {
    Rng rng = eigen_rng(options);
    out.basis = subspace_iteration(a, options.rank(), options.eigensolver, rng);
  }
  out.stage_ms["eigensolve"] = sw.lap_ms();
  out.clustering = cluster_rows(out.basis, options);
  out.stage_ms["kmeans"] = sw.lap_ms();
  return out;
}

RpResult rp_spectral_cluster(const SymOperator& a, const ClusterOptions& options, SketchConfig sketch) {
  check_ranks(options, a.dim());
  sketch.target_rank = options.rank();
  RpResult out;
  Stopwatch sw;
  out.sketch = randomized_eig(a, sketch);
  out.basis = out.sketch.basis;
  out.stage_ms["eigensolve"] = sw.lap_ms();
  out.clustering = cluster_rows(out.basis, options);
  out.stage_ms["kmeans"] = sw.lap_ms();
  return out;
}

RsGraphResult rs_spectral_cluster(const SparseSymGraph& a, const ClusterOptions& options,
                                  const SamplingConfig& sampling) {
  check_ranks(options, a.num_nodes());
  RsGraphResult out;
  Stopwatch sw;
  Rng sample_rng(sampling.seed);
  out.sparsified = sparsify(a, sampling, sample_rng);
  out.stage_ms["sparsify"] = sw.lap_ms();
  Rng rng = eigen_rng(options);
  out.basis = subspace_iteration(as_operator(out.sparsified), options.rank(), options.eigensolver, rng);
  out.stage_ms["eigensolve"] = sw.lap_ms();
  out.clustering = cluster_rows(out.basis, options);
  out.stage_ms["kmeans"] = sw.lap_ms();
  return out;
}

RsDenseGraphResult rs_spectral_cluster(const DenseSymMatrix& a, const ClusterOptions& options,
                                       const SamplingConfig& sampling) {
  check_ranks(options, a.dim());
  RsDenseGraphResult out;
  Stopwatch sw;
  Rng sample_rng(sampling.seed);
  out.sparsified = sparsify(a, sampling, sample_rng);
  out.stage_ms["sparsify"] = sw.lap_ms();
  Rng rng = eigen_rng(options);
  out.basis = subspace_iteration(as_operator(out.sparsified), options.rank(), options.eigensolver, rng);
  out.stage_ms["eigensolve"] = sw.lap_ms();
  out.clustering = cluster_rows(out.basis, options);
  out.stage_ms["kmeans"] = sw.lap_ms();
  return out;
}

nlohmann::json clustering_to_json(const Clustering& c, std::span<const std::int64_t> original_ids) {
  if (!original_ids.empty() && original_ids.size() != c.labels.size())
    throw DimensionError("clustering_to_json: id map length differs from label count");
  nlohmann::json doc;
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t i = 0; i < c.labels.size(); ++i) {
    const std::int64_t id = original_ids.empty() ? static_cast<std::int64_t>(i) : original_ids[i];
    nodes.push_back({{"id", id}, {"label", c.labels[i]}});
  }
  doc["nodes"] = std::move(nodes);
  nlohmann::json cent = nlohmann::json::array();
  for (std::size_t k = 0; k < c.centroids.rows(); ++k) {
    auto r = c.centroids.row(k);
    cent.push_back(std::vector<double>(r.begin(), r.end()));
  }
  doc["centroids"] = std::move(cent);
  doc["objective"] = c.objective;
  doc["n_iter"] = c.n_iter;
  doc["converged"] = c.converged;
  return doc;
}

void write_clustering_csv(std::ostream& out, const Clustering& c, std::span<const std::int64_t> original_ids) {
  if (!original_ids.empty() && original_ids.size() != c.labels.size())
    throw DimensionError("write_clustering_csv: id map length differs from label count");
  out << "id,label\n";
  for (std::size_t i = 0; i < c.labels.size(); ++i)
    out << (original_ids.empty() ? static_cast<std::int64_t>(i) : original_ids[i]) << ',' << c.labels[i] << '\n';
}

}  // namespace rsclust
