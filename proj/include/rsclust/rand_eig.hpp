#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "rsclust/dense.hpp"
#include "rsclust/linear_operator.hpp"
#include "rsclust/random.hpp"

namespace rsclust {

enum class TestDistribution { gaussian, uniform, rademacher };

// Which eigenpairs count as "leading".
enum class Selection { algebraic, magnitude };

TestDistribution parse_test_distribution(std::string_view name);
std::string_view to_string(TestDistribution d);
Selection parse_selection(std::string_view name);
std::string_view to_string(Selection s);

struct SketchConfig {
  std::size_t target_rank = 1;  // K'
  std::size_t oversampling = 10;  // r
  std::size_t power = 2;  // q
  TestDistribution distribution = TestDistribution::gaussian;
  std::uint64_t seed = 0;
  Selection selection = Selection::algebraic;
};

// n x l block of unit-variance i.i.d. entries. Filled column by column, so a
// wider block drawn from the same seed extends a narrower one.
Matrix draw_test_matrix(std::size_t n, std::size_t l, TestDistribution distribution, Rng& rng);

struct RangeResult {
  Matrix q;
  std::size_t requested_columns = 0;  // K' + r before clamping
  bool clamped = false;
  std::size_t dropped_columns = 0;
};

// Orthonormal basis for range(A^{2q+1} Omega), computed as 2q+1 applications
// of A with re-orthonormalization between them.
RangeResult randomized_range(const SymOperator& a, const SketchConfig& cfg);

struct SketchResult {
  EigenBasis basis;  // K' leading Ritz pairs, U = Q V
  Matrix q;
  DenseSymMatrix c;  // Qᵀ A Q
  bool clamped = false;
  std::size_t dropped_columns = 0;

  // Q C Qᵀ as factors.
  LowRankFactors factors() const;
};

SketchResult randomized_eig(const SymOperator& a, const SketchConfig& cfg);

// Indices of the k leading eigenvalues (values sorted descending), returned
// in descending algebraic order.
std::vector<std::size_t> leading_indices(const std::vector<double>& values, std::size_t k, Selection selection);

}  // namespace rsclust
