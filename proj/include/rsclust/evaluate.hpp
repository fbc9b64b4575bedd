#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rsclust/dense.hpp"
#include "rsclust/graph.hpp"
#include "rsclust/linear_operator.hpp"

namespace rsclust {

// L1 misclassification: the minimum over label permutations of
// sum_k |{i in G_k : est_i mapped != k}| / n_k. `permutation[k]` is the
// estimated label matched to true community k.
struct L1Result {
  double value = 0.0;
  std::vector<std::size_t> permutation;
};

// Per-community mismatch cost: cost(k, l) = |{i in G_k : est_i != l}| / n_k.
// Throws ParameterError on labels >= K or an empty true community.
std::vector<std::size_t> mismatch_counts(std::span<const std::size_t> est, std::span<const std::size_t> truth,
                                         std::size_t K, std::vector<std::size_t>& sizes);

// Exhaustive search over K! permutations (first optimum in lexicographic order).
L1Result misclassification_l1_brute(std::span<const std::size_t> est, std::span<const std::size_t> truth, std::size_t K);
// Linear assignment on the K x K cost matrix.
L1Result misclassification_l1_assignment(std::span<const std::size_t> est, std::span<const std::size_t> truth,
                                         std::size_t K);
// Brute force for K <= 8, assignment above.
L1Result misclassification_l1(std::span<const std::size_t> est, std::span<const std::size_t> truth, std::size_t K);

// Value of a given matching, summed in community order with a compensated
// accumulator so equal exact sums give equal doubles.
double l1_value(const std::vector<std::size_t>& mismatches, const std::vector<std::size_t>& sizes,
                std::span<const std::size_t> permutation, std::size_t K);

// Minimum-cost perfect matching of a square cost matrix (row r -> column
// result[r]).
std::vector<std::size_t> hungarian(const Matrix& cost);

// Plug-in estimate B~_ql = sum_{i in G_q, j in G_l} A~_ij / (n_q n_l), over
// all ordered pairs including i == j. Throws ParameterError when an
// estimated cluster is empty.
Matrix estimate_B(const SparseSymGraph& a, std::span<const std::size_t> labels, std::size_t K);
Matrix estimate_B(const DenseSymMatrix& a, std::span<const std::size_t> labels, std::size_t K);
Matrix estimate_B(const LowRankFactors& a, std::span<const std::size_t> labels, std::size_t K);
Matrix estimate_B(const SymOperator& a, std::span<const std::size_t> labels, std::size_t K);

// max |B~ - B| entrywise. With a permutation, B~ is first aligned so that
// estimated label permutation[k] plays the role of true community k.
double b_error(const Matrix& b_est, const Matrix& b_true);
double b_error(const Matrix& b_est, const Matrix& b_true, std::span<const std::size_t> permutation);

struct PairMetrics {
  double f1 = 0.0;
  double nmi = 0.0;
  double ari = 0.0;
};

// Pairwise co-membership F1, NMI normalized by the arithmetic mean of the
// two entropies, and the adjusted Rand index.
PairMetrics pair_metrics(std::span<const std::size_t> est, std::span<const std::size_t> ref);

// ||A~ - P||_2 by power iteration on the difference operator. On
// non-convergence the last estimate is returned and a warning is logged.
double deviation_norm(const SymOperator& approx, const SymOperator& population, std::uint64_t seed,
                      double tol = 1e-7);

// One replication of one method at one grid point.
struct ReportRow {
  std::string grid_value;
  std::size_t grid_index = 0;
  std::string method;
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  std::optional<double> deviation;
  std::optional<double> l1;
  std::optional<double> b_err;
  std::optional<double> f1;
  std::optional<double> nmi;
  std::optional<double> ari;
  std::map<std::string, double> stage_ms;  // not part of rows.csv
};

struct ExperimentReport {
  std::string axis;
  std::vector<ReportRow> rows;

  static const std::vector<std::string>& csv_columns();
  void write_rows_csv(std::ostream& out) const;
  // Per stage wall time, one line per row and stage.
  void write_timing_csv(std::ostream& out) const;
  // Mean and sample standard deviation per (grid value, method).
  nlohmann::json aggregate() const;
};

// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace rsclust
