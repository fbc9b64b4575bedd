#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string_view>

#include "rsclust/dense.hpp"
#include "rsclust/graph.hpp"
#include "rsclust/linear_operator.hpp"
#include "rsclust/rand_eig.hpp"
#include "rsclust/random.hpp"

namespace rsclust {

// p_ij for an unordered pair; must lie in (0, 1].
using ProbabilityFn = std::function<double(std::size_t, std::size_t)>;

enum class SamplingMode { uniform, row_norm, explicit_probs };

SamplingMode parse_sampling_mode(std::string_view name);
std::string_view to_string(SamplingMode m);

struct SamplingConfig {
  SamplingMode mode = SamplingMode::uniform;
  double p = 0.7;             // uniform mode
  double p_min = 0.05;        // row_norm floor
  double target_mean = 0.7;   // row_norm mean edge probability
  ProbabilityFn probability;  // explicit mode
  std::uint64_t seed = 0;
};

// Resolves the configured mode into a per-pair probability for graph `a`.
ProbabilityFn sampling_probabilities(const SparseSymGraph& a, const SamplingConfig& cfg);

// p_ij = clamp(c * max(|A_i|, |A_j|) / max_k |A_k|, p_min, 1), with c chosen
// so that the mean over stored edges equals target_mean.
ProbabilityFn row_norm_probs(const SparseSymGraph& a, double p_min, double target_mean);

// Keeps each stored edge (visited row-major, i < j) when u < p_ij and
// rescales it by 1/p_ij. One uniform draw per edge, so for a fixed stream a
// larger p keeps a superset of edges.
SparseSymGraph sparsify(const SparseSymGraph& a, const ProbabilityFn& p, Rng& rng);
SparseSymGraph sparsify(const SparseSymGraph& a, const SamplingConfig& cfg, Rng& rng);
// Dense variant used for population matrices: samples every nonzero entry
// with i <= j, diagonal included, with uniform probability cfg.p.
DenseSymMatrix sparsify(const DenseSymMatrix& a, const SamplingConfig& cfg, Rng& rng);

struct SubspaceOptions {
  double tol = 1e-8;
  std::size_t max_iter = 1000;
  std::size_t extra = 5;  // block size is K' + extra (capped at n)
  Selection selection = Selection::algebraic;
};

// Block orthogonal iteration with Rayleigh-Ritz extraction. Converged when
// the selected Ritz values change by less than tol relative between
// iterations. Throws ConvergenceError carrying the last Ritz values.
EigenBasis subspace_iteration(const SymOperator& a, std::size_t target_rank, const SubspaceOptions& options,
                              Rng& rng);

struct RsResult {
  EigenBasis basis;
  SparseSymGraph sparsified;
};

struct RsDenseResult {
  EigenBasis basis;
  DenseSymMatrix sparsified;
};

RsResult rs_low_rank(const SparseSymGraph& a, const SamplingConfig& cfg, std::size_t target_rank, Rng& rng,
                     const SubspaceOptions& options = {});
RsDenseResult rs_low_rank(const DenseSymMatrix& a, const SamplingConfig& cfg, std::size_t target_rank, Rng& rng,
                          const SubspaceOptions& options = {});

}  // namespace rsclust
