#include "rsclust/sample_eig.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "rsclust/error.hpp"
#include "rsclust/linalg.hpp"

namespace rsclust {

SamplingMode parse_sampling_mode(std::string_view name) {
  if (name == "uniform") return SamplingMode::uniform;
  if (name == "row_norm") return SamplingMode::row_norm;
  if (name == "explicit") return SamplingMode::explicit_probs;
  throw ParameterError("unknown sampling mode '" + std::string(name) + "'");
}

std::string_view to_string(SamplingMode m) {
  switch (m) {
    case SamplingMode::uniform: return "uniform";
    case SamplingMode::row_norm: return "row_norm";
    case SamplingMode::explicit_probs: return "explicit";
  }
  return "uniform";
}

namespace {

void check_probability(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw ParameterError("sampling probability must lie in (0, 1], got " + std::to_string(p));
}

}  // namespace

ProbabilityFn row_norm_probs(const SparseSymGraph& a, double p_min, double target_mean) {
  if (!(p_min > 0.0 && p_min <= 1.0)) throw ParameterError("row_norm_probs: p_min must lie in (0, 1]");
  if (!(target_mean >= p_min && target_mean <= 1.0))
    throw ParameterError("row_norm_probs: target mean must lie in [p_min, 1]");
  const std::size_t n = a.num_nodes();
  auto norms = std::make_shared<std::vector<double>>(n);
  double max_norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    (*norms)[i] = norm2(a.weights(i));
    max_norm = std::max(max_norm, (*norms)[i]);
  }
  if (max_norm == 0.0) throw ParameterError("row_norm_probs: graph has no edges");

  std::vector<double> scores;
  scores.reserve(a.num_edges());
  for (const Edge& e : a.edges()) scores.push_back(std::max((*norms)[e.i], (*norms)[e.j]) / max_norm);
  auto mean_at = [&](double c) {
    double s = 0.0;
    for (double v : scores) s += std::clamp(c * v, p_min, 1.0);
    return s / static_cast<double>(scores.size());
  };
  // mean_at is nondecreasing in c, p_min at c = 0 and 1 once c >= 1/min score.
  double lo = 0.0, hi = 1.0 / *std::min_element(scores.begin(), scores.end());
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_at(mid) < target_mean ? lo : hi) = mid;
  }
  const double c = 0.5 * (lo + hi);
  return [norms, c, p_min, max_norm](std::size_t i, std::size_t j) {
    return std::clamp(c * std::max((*norms)[i], (*norms)[j]) / max_norm, p_min, 1.0);
  };
}

ProbabilityFn sampling_probabilities(const SparseSymGraph& a, const SamplingConfig& cfg) {
  switch (cfg.mode) {
    case SamplingMode::uniform: {
      check_probability(cfg.p);
      const double p = cfg.p;
      return [p](std::size_t, std::size_t) { return p; };
    }
    case SamplingMode::row_norm: return row_norm_probs(a, cfg.p_min, cfg.target_mean);
    case SamplingMode::explicit_probs:
      if (!cfg.probability) throw ParameterError("explicit sampling mode needs a probability accessor");
      return cfg.probability;
  }
  throw ParameterError("unknown sampling mode");
}

SparseSymGraph sparsify(const SparseSymGraph& a, const ProbabilityFn& p, Rng& rng) {
  std::vector<Edge> kept;
  for (const Edge& e : a.edges()) {
    const double pij = p(e.i, e.j);
    check_probability(pij);
    if (rng.uniform() < pij) kept.push_back({e.i, e.j, e.w / pij});
  }
  return SparseSymGraph::from_edges(a.num_nodes(), std::move(kept));
}

SparseSymGraph sparsify(const SparseSymGraph& a, const SamplingConfig& cfg, Rng& rng) {
  return sparsify(a, sampling_probabilities(a, cfg), rng);
}

DenseSymMatrix sparsify(const DenseSymMatrix& a, const SamplingConfig& cfg, Rng& rng) {
  if (cfg.mode != SamplingMode::uniform) throw ParameterError("dense sparsify supports uniform sampling only");
  check_probability(cfg.p);
  const std::size_t n = a.dim();
  DenseSymMatrix out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double v = a(i, j);
      if (v == 0.0) continue;
      if (rng.uniform() < cfg.p) out.set(i, j, v / cfg.p);
    }
  return out;
}

EigenBasis subspace_iteration(const SymOperator& a, std::size_t target_rank, const SubspaceOptions& options,
                              Rng& rng) {
  const std::size_t n = a.dim();
  if (target_rank == 0) throw ParameterError("subspace_iteration: target rank must be at least 1");
  if (target_rank > n) throw ParameterError("subspace_iteration: target rank exceeds dimension");
  if (!(options.tol > 0.0)) throw ParameterError("subspace_iteration: tol must be positive");
  const std::size_t block = std::min(n, target_rank + options.extra);

  Matrix x = draw_test_matrix(n, block, TestDistribution::gaussian, rng);
  x = qr_orthonormalize(x, kQrRankTol, true).q;
  if (x.cols() < block) x = complete_basis(x, block, rng);

  double shift = 0.0;
  bool shifted = false;
  std::vector<double> previous;
  std::vector<double> selected_values;
  for (std::size_t it = 0; it < options.max_iter; ++it) {
    Matrix ax = a.apply(x);
    EigenBasis ritz = dense_sym_eig(DenseSymMatrix::symmetrize(multiply_at_b(x, ax)));
    const auto keep = leading_indices(ritz.values, target_rank, options.selection);
    selected_values.clear();
    for (std::size_t k : keep) selected_values.push_back(ritz.values[k]);

    // A negative eigenvalue that outweighs the K'-th algebraic one crowds the
    // block under plain iteration; iterate on A + sI instead.
    if (!shifted && options.selection == Selection::algebraic && it >= 2) {
      const double kth = selected_values.back();
      if (ritz.values.back() < -std::abs(kth)) {
        Rng norm_rng(rng.next());
        shift = operator_norm(a, NormOptions{1e-3, 20000}, norm_rng) * 1.01;
        shifted = true;
        previous.clear();
      }
    }

    if (previous.size() == selected_values.size()) {
      double change = 0.0;
      double scale = 0.0;
      for (std::size_t k = 0; k < selected_values.size(); ++k) {
        change = std::max(change, std::abs(selected_values[k] - previous[k]));
        scale = std::max(scale, std::abs(selected_values[k]));
      }
      if (change <= options.tol * scale || scale == 0.0) {
        EigenBasis out;
        out.vectors = multiply(x, ritz.vectors.select_columns(keep));
        out.values = selected_values;
        return out;
      }
    }
    previous = selected_values;

    if (shifted) {
      auto xd = x.data();
      auto yd = ax.data();
      for (std::size_t k = 0; k < yd.size(); ++k) yd[k] += shift * xd[k];
    }
    x = qr_orthonormalize(ax, kQrRankTol, true).q;
    if (x.cols() < block) x = complete_basis(x, block, rng);
  }
  throw ConvergenceError("subspace_iteration: Ritz values did not converge", selected_values, options.max_iter);
}

RsResult rs_low_rank(const SparseSymGraph& a, const SamplingConfig& cfg, std::size_t target_rank, Rng& rng,
                     const SubspaceOptions& options) {
  RsResult out;
  out.sparsified = sparsify(a, cfg, rng);
  out.basis = subspace_iteration(as_operator(out.sparsified), target_rank, options, rng);
  return out;
}

RsDenseResult rs_low_rank(const DenseSymMatrix& a, const SamplingConfig& cfg, std::size_t target_rank, Rng& rng,
                          const SubspaceOptions& options) {
  RsDenseResult out;
  out.sparsified = sparsify(a, cfg, rng);
  out.basis = subspace_iteration(as_operator(out.sparsified), target_rank, options, rng);
  return out;
}

}  // namespace rsclust
