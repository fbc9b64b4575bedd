#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <span>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rsclust/dense.hpp"
#include "rsclust/graph.hpp"
#include "rsclust/linear_operator.hpp"
#include "rsclust/rand_eig.hpp"
#include "rsclust/sample_eig.hpp"

namespace rsclust {

struct Clustering {
  std::vector<std::size_t> labels;
  Matrix centroids;          // K x d
  double objective = 0.0;    // sum of squared distances to assigned centroids
  std::size_t n_iter = 0;
  bool converged = false;
  std::vector<double> trace;  // objective after each Lloyd iteration of the winning restart
  std::size_t restart = 0;    // index of the winning restart
};

struct KMeansOptions {
  std::size_t restarts = 50;
  std::size_t max_iter = 300;
  // Stop early when an iteration lowers the objective by less than tol
  // relative. 0 runs to the assignment fixpoint.
  double tol = 0.0;
  std::uint64_t seed = 0;
};

// Lloyd's algorithm from k-means++ starts; the best objective over restarts
// wins, ties going to the lowest restart index. Restart r draws from
// derive_seed(seed, {r}).
Clustering kmeans_lloyd(const Matrix& points, std::size_t K, const KMeansOptions& options = {});

// Scales every row with norm >= 1e-12 to unit length; other rows are left as is.
Matrix normalize_rows(const Matrix& u);

enum class Variant { plain, spherical };
enum class Backend { exact, dense };

Variant parse_variant(std::string_view name);
std::string_view to_string(Variant v);
Backend parse_backend(std::string_view name);

struct ClusterOptions {
  std::size_t K = 2;
  std::size_t target_rank = 0;  // K'; 0 means K
  Variant variant = Variant::plain;
  Backend backend = Backend::exact;
  KMeansOptions kmeans;
  SubspaceOptions eigensolver;
  std::uint64_t seed = 0;  // eigensolver start and k-means streams derive from this

  std::size_t rank() const noexcept { return target_rank == 0 ? K : target_rank; }
};

// Wall time in milliseconds per pipeline stage (sparsify, eigensolve, kmeans).
using StageTimes = std::map<std::string, double>;

struct SpectralResult {
  Clustering clustering;
  EigenBasis basis;
  StageTimes stage_ms;
};

struct RpResult {
  Clustering clustering;
  EigenBasis basis;
  SketchResult sketch;  // holds Q and C, so QCQᵀ is available as factors
  StageTimes stage_ms;
};

struct RsGraphResult {
  Clustering clustering;
  EigenBasis basis;
  SparseSymGraph sparsified;
  StageTimes stage_ms;
};

struct RsDenseGraphResult {
  Clustering clustering;
  EigenBasis basis;
  DenseSymMatrix sparsified;
  StageTimes stage_ms;
};

// Leading K' eigenvectors of A, then k-means on their rows (row-normalized
// first for the spherical variant).
SpectralResult spectral_cluster(const SymOperator& a, const ClusterOptions& options);
RpResult rp_spectral_cluster(const SymOperator& a, const ClusterOptions& options, SketchConfig sketch);
RsGraphResult rs_spectral_cluster(const SparseSymGraph& a, const ClusterOptions& options,
                                  const SamplingConfig& sampling);
RsDenseGraphResult rs_spectral_cluster(const DenseSymMatrix& a, const ClusterOptions& options,
                                       const SamplingConfig& sampling);

// k-means on the rows of an eigenbasis, as done by every pipeline.
Clustering cluster_rows(const EigenBasis& basis, const ClusterOptions& options);

// Labels keyed by original node ids when given.
nlohmann::json clustering_to_json(const Clustering& c, std::span<const std::int64_t> original_ids = {});
void write_clustering_csv(std::ostream& out, const Clustering& c, std::span<const std::int64_t> original_ids = {});

}  // namespace rsclust
