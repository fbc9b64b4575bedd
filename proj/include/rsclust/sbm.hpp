#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rsclust/dense.hpp"
#include "rsclust/graph.hpp"
#include "rsclust/linear_operator.hpp"
#include "rsclust/random.hpp"

namespace rsclust {

inline constexpr double kRankTol = 1e-9;

struct SbmParams {
  std::size_t n = 0;
  std::size_t K = 0;
  std::vector<std::size_t> g;               // community of each node, in [0, K)
  Matrix B;                                 // K x K, symmetric, entries in [0, 1]
  std::optional<std::vector<double>> vartheta;  // degree propensities (DC-SBM)

  // Throws ParameterError describing the first violated invariant.
  void validate() const;
  std::vector<std::size_t> community_sizes() const;
  // Number of eigenvalues of B above rank_tol times the largest in magnitude.
  std::size_t target_rank(double rank_tol = kRankTol) const;
  bool degree_corrected() const noexcept { return vartheta.has_value(); }
};

// Contiguous membership: the first sizes[0] nodes in community 0 and so on.
std::vector<std::size_t> contiguous_membership(const std::vector<std::size_t>& sizes);

SbmParams make_sbm(std::vector<std::size_t> g, Matrix B, std::optional<std::vector<double>> vartheta = {});

// Each pair i < j, visited row-major with one uniform draw u per pair, is an
// edge when u < P_ij.
SparseSymGraph sample_sbm(const SbmParams& params, Rng& rng);
SparseSymGraph sample_dcsbm(const SbmParams& params, Rng& rng);
// Dispatches on whether vartheta is present.
SparseSymGraph sample_graph(const SbmParams& params, Rng& rng);

inline constexpr std::size_t kDenseCap = 5000;

// P_ij = vartheta_i vartheta_j B[g_i][g_j], diagonal included.
DenseSymMatrix population_matrix(const SbmParams& params, std::size_t dense_cap = kDenseCap);
// P applied in O(nK) per column without forming it. Keeps its own copy of params.
SymOperator population_operator(const SbmParams& params);

struct PopulationEigen {
  EigenBasis basis;               // U (n x K'), Sigma
  Matrix H;                       // K x K' eigenvectors of the reduced matrix
  Matrix B_bar;                   // Omega B Omega
  std::vector<double> omega;      // per-community norm of vartheta (sqrt(n_k) for SBM)
  bool positive = true;           // all retained eigenvalues > 0
};

// Exact eigenstructure of P from the K x K reduction. Retains eigenvalues
// whose magnitude exceeds rank_tol times the largest. Throws EmptyRangeError
// when B is numerically zero.
PopulationEigen population_eigens(const SbmParams& params, double rank_tol = kRankTol);

struct ModelDiagnostics {
  std::size_t K = 0;
  std::size_t target_rank = 0;
  bool degree_corrected = false;
  double gamma_n = 0.0;   // smallest retained eigenvalue of P
  double sigma_n = 0.0;   // largest eigenvalue of P
  double alpha_n = 0.0;   // max entry of B
  double delta_1n = 0.0;  // min over k != l of sqrt(1/n_k + 1/n_l)
  double delta_n = 0.0;   // delta_1n when full rank, xi_n when rank deficient
  bool positive_spectrum = true;

  // Rank-deficient SBM separation.
  double eta_n = 0.0;
  double iota_n = 0.0;
  double xi_n = 0.0;
  double exact_separation = 0.0;  // min distance between rows of U in different communities

  // DC-SBM angle separation.
  double eta_prime_n = 0.0;
  double iota_lower = 0.0;
  double iota_upper = 0.0;
  double beta_n = 0.0;
  double xi_prime_n = 0.0;
  double max_cross_cosine = 0.0;  // over rows of H in different communities

  bool hypothesis_holds = true;  // separation hypotheses (rank-deficient case)
  bool bound_satisfied = true;   // exact separation / cosine respects the bound
};

ModelDiagnostics diagnostics(const SbmParams& params, double rank_tol = kRankTol);

struct BenchmarkSpec {
  std::string name = "eq47";  // eq47 or model1..model6
  std::size_t n = 0;
  std::size_t K = 3;     // eq47 only
  double alpha = 0.2;    // eq47 only
  double lambda = 0.5;   // eq47 only
};

// B = alpha * lambda * I + alpha * (1 - lambda) * 11ᵀ with near-balanced
// contiguous communities (the first n mod K get one extra node).
SbmParams make_eq47(std::size_t n, std::size_t K, double alpha, double lambda);

// Random parameters are drawn from rng in a fixed order: diagonal of B,
// upper off-diagonal row-major, then vartheta node by node.
SbmParams make_benchmark_model(const BenchmarkSpec& spec, Rng& rng);
// Models 4-6 are degree corrected and call for the spherical variant.
bool benchmark_is_degree_corrected(std::string_view name);

nlohmann::json to_json(const SbmParams& params);
SbmParams sbm_params_from_json(const nlohmann::json& doc);

}  // namespace rsclust
