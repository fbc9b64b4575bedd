#include "rsclust/rand_eig.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rsclust/error.hpp"
#include "rsclust/linalg.hpp"
#include "rsclust/log.hpp"

namespace rsclust {

TestDistribution parse_test_distribution(std::string_view name) {
  if (name == "gaussian") return TestDistribution::gaussian;
  if (name == "uniform") return TestDistribution::uniform;
  if (name == "rademacher") return TestDistribution::rademacher;
  throw ParameterError("unknown test distribution '" + std::string(name) + "'");
}

std::string_view to_string(TestDistribution d) {
  switch (d) {
    case TestDistribution::gaussian: return "gaussian";
    case TestDistribution::uniform: return "uniform";
    case TestDistribution::rademacher: return "rademacher";
  }
  return "gaussian";
}

Selection parse_selection(std::string_view name) {
  if (name == "algebraic") return Selection::algebraic;
  if (name == "magnitude") return Selection::magnitude;
  throw ParameterError("unknown eigenvalue selection '" + std::string(name) + "'");
}

std::string_view to_string(Selection s) { return s == Selection::algebraic ? "algebraic" : "magnitude"; }

Matrix draw_test_matrix(std::size_t n, std::size_t l, TestDistribution distribution, Rng& rng) {
  Matrix omega(n, l);
  const double sqrt3 = std::sqrt(3.0);
  for (std::size_t j = 0; j < l; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      double v = 0.0;
      switch (distribution) {
        case TestDistribution::gaussian: v = rng.normal(); break;
        case TestDistribution::uniform: v = sqrt3 * (2.0 * rng.uniform() - 1.0); break;
        case TestDistribution::rademacher: v = (rng.next() >> 63) ? 1.0 : -1.0; break;
      }
      omega(i, j) = v;
    }
  return omega;
}

RangeResult randomized_range(const SymOperator& a, const SketchConfig& cfg) {
  const std::size_t n = a.dim();
  if (cfg.target_rank == 0) throw ParameterError("randomized_range: target rank must be at least 1");
  if (cfg.target_rank > n) throw ParameterError("randomized_range: target rank exceeds dimension");
  RangeResult out;
  out.requested_columns = cfg.target_rank + cfg.oversampling;
  std::size_t l = out.requested_columns;
  if (l > n) {
    warn("sketch width " + std::to_string(l) + " exceeds dimension " + std::to_string(n) + "; clamped");
    l = n;
    out.clamped = true;
  }
  Rng rng(cfg.seed);
  Matrix y = a.apply(draw_test_matrix(n, l, cfg.distribution, rng));
  for (std::size_t k = 0; k < 2 * cfg.power; ++k) y = a.apply(qr_orthonormalize(y, kQrRankTol, true).q);
  QrResult qr = qr_orthonormalize(y, kQrRankTol, true);
  out.dropped_columns = l - qr.q.cols();
  out.q = std::move(qr.q);
  return out;
}

std::vector<std::size_t> leading_indices(const std::vector<double>& values, std::size_t k, Selection selection) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  if (selection == Selection::magnitude)
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(values[a]) > std::abs(values[b]); });
  idx.resize(std::min(k, idx.size()));
  std::sort(idx.begin(), idx.end());
  return idx;
}

LowRankFactors SketchResult::factors() const { return {q, c.to_matrix()}; }

SketchResult randomized_eig(const SymOperator& a, const SketchConfig& cfg) {
  RangeResult range = randomized_range(a, cfg);
  SketchResult out;
  out.clamped = range.clamped;
  out.dropped_columns = range.dropped_columns;
  out.q = std::move(range.q);
  if (out.q.cols() < cfg.target_rank) {
    // Range of A has fewer than K' directions; pad with arbitrary orthogonal ones.
    Rng pad(derive_seed(cfg.seed, {hash_tag("pad")}));
    out.q = complete_basis(out.q, cfg.target_rank, pad);
  }
  out.c = DenseSymMatrix::symmetrize(multiply_at_b(out.q, a.apply(out.q)));
  EigenBasis small = dense_sym_eig(out.c);
  const auto keep = leading_indices(small.values, cfg.target_rank, cfg.selection);
  out.basis.vectors = multiply(out.q, small.vectors.select_columns(keep));
  for (std::size_t k : keep) out.basis.values.push_back(small.values[k]);
  return out;
}

}  // namespace rsclust
