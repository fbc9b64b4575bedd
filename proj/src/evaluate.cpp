#include "rsclust/evaluate.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <cmath>
#include <numeric>
#include <ostream>

#include "rsclust/error.hpp"
#include "rsclust/log.hpp"

namespace rsclust {

std::vector<std::size_t> mismatch_counts(std::span<const std::size_t> est, std::span<const std::size_t> truth,
                                         std::size_t K, std::vector<std::size_t>& sizes) {
  if (est.size() != truth.size())
    throw DimensionError("label vectors differ in length (" + std::to_string(est.size()) + " vs " +
                         std::to_string(truth.size()) + ")");
  if (K == 0) throw ParameterError("K must be at least 1");
  // agree[k * K + l] = |{i in G_k : est_i == l}|
  std::vector<std::size_t> agree(K * K, 0);
  sizes.assign(K, 0);
  for (std::size_t i = 0; i < est.size(); ++i) {
    if (est[i] >= K || truth[i] >= K) throw ParameterError("label out of range at node " + std::to_string(i));
    ++agree[truth[i] * K + est[i]];
    ++sizes[truth[i]];
  }
  for (std::size_t k = 0; k < K; ++k)
    if (sizes[k] == 0) throw ParameterError("true community " + std::to_string(k) + " is empty");
  std::vector<std::size_t> mismatch(K * K);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = 0; l < K; ++l) mismatch[k * K + l] = sizes[k] - agree[k * K + l];
  return mismatch;
}

double l1_value(const std::vector<std::size_t>& mismatches, const std::vector<std::size_t>& sizes,
                std::span<const std::size_t> permutation, std::size_t K) {
  // Double-double accumulation: each m/n is split into quotient and exact
  // residual, then summed with TwoSum.
  double hi = 0.0, lo = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double m = static_cast<double>(mismatches[k * K + permutation[k]]);
    const double n = static_cast<double>(sizes[k]);
    const double q = m / n;
    const double r = std::fma(-q, n, m) / n;
    const double s = hi + q;
    const double bp = s - hi;
    const double err = (hi - (s - bp)) + (q - bp);
    hi = s;
    lo += err + r;
  }
  return hi + lo;
}

L1Result misclassification_l1_brute(std::span<const std::size_t> est, std::span<const std::size_t> truth,
                                    std::size_t K) {
  std::vector<std::size_t> sizes;
  const auto mm = mismatch_counts(est, truth, K, sizes);
  std::vector<std::size_t> perm(K);
  std::iota(perm.begin(), perm.end(), 0);
  L1Result best;
  bool first = true;
  do {
    const double v = l1_value(mm, sizes, perm, K);
    if (first || v < best.value) {
      best.value = v;
      best.permutation = perm;
      first = false;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::vector<std::size_t> hungarian(const Matrix& cost) {
  const std::size_t n = cost.rows();
  if (cost.cols() != n) throw DimensionError("hungarian: cost matrix must be square");
  if (n == 0) return {};
  const double inf = std::numeric_limits<double>::infinity();
  // Potentials and matching, 1-based with column 0 as the virtual start.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t row = 1; row <= n; ++row) {
    match[0] = row;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> result(n);
  for (std::size_t j = 1; j <= n; ++j) result[match[j] - 1] = j - 1;
  return result;
}

L1Result misclassification_l1_assignment(std::span<const std::size_t> est, std::span<const std::size_t> truth,
                                         std::size_t K) {
  std::vector<std::size_t> sizes;
  const auto mm = mismatch_counts(est, truth, K, sizes);
  Matrix cost(K, K);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = 0; l < K; ++l)
      cost(k, l) = static_cast<double>(mm[k * K + l]) / static_cast<double>(sizes[k]);
  L1Result out;
  out.permutation = hungarian(cost);
  out.value = l1_value(mm, sizes, out.permutation, K);
  return out;
}

L1Result misclassification_l1(std::span<const std::size_t> est, std::span<const std::size_t> truth, std::size_t K) {
  return K <= 8 ? misclassification_l1_brute(est, truth, K) : misclassification_l1_assignment(est, truth, K);
}

namespace {

std::vector<double> cluster_sizes(std::span<const std::size_t> labels, std::size_t K) {
  std::vector<double> sizes(K, 0.0);
  for (std::size_t l : labels) {
    if (l >= K) throw ParameterError("estimated label out of range");
    sizes[l] += 1.0;
  }
  for (std::size_t k = 0; k < K; ++k)
    if (sizes[k] == 0.0) throw ParameterError("estimated cluster " + std::to_string(k) + " is empty");
  return sizes;
}

Matrix normalize_block_sums(Matrix sums, const std::vector<double>& sizes) {
  const std::size_t K = sizes.size();
  Matrix out(K, K);
  for (std::size_t q = 0; q < K; ++q)
    for (std::size_t l = 0; l < K; ++l) {
      // Average the two triangles so the estimate is exactly symmetric.
      const double s = q == l ? sums(q, q) : 0.5 * (sums(q, l) + sums(l, q));
      out(q, l) = s / (sizes[q] * sizes[l]);
    }
  return out;
}

void check_length(std::size_t n, std::size_t labels) {
  if (n != labels) throw DimensionError("label vector length does not match matrix dimension");
}

}  // namespace

Matrix estimate_B(const SparseSymGraph& a, std::span<const std::size_t> labels, std::size_t K) {
  check_length(a.num_nodes(), labels.size());
  const auto sizes = cluster_sizes(labels, K);
  Matrix sums(K, K);
  for (std::size_t i = 0; i < a.num_nodes(); ++i) {
    auto nb = a.neighbors(i);
    auto w = a.weights(i);
    for (std::size_t k = 0; k < nb.size(); ++k) sums(labels[i], labels[nb[k]]) += w[k];
  }
  return normalize_block_sums(std::move(sums), sizes);
}

Matrix estimate_B(const DenseSymMatrix& a, std::span<const std::size_t> labels, std::size_t K) {
  check_length(a.dim(), labels.size());
  const auto sizes = cluster_sizes(labels, K);
  Matrix sums(K, K);
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j) sums(labels[i], labels[j]) += a(i, j);
  return normalize_block_sums(std::move(sums), sizes);
}

Matrix estimate_B(const LowRankFactors& a, std::span<const std::size_t> labels, std::size_t K) {
  check_length(a.dim(), labels.size());
  const auto sizes = cluster_sizes(labels, K);
  // M = Θᵀ basis, then sums = M core Mᵀ.
  Matrix m(K, a.rank());
  for (std::size_t i = 0; i < a.dim(); ++i) {
    auto br = a.basis.row(i);
    auto mr = m.row(labels[i]);
    for (std::size_t c = 0; c < br.size(); ++c) mr[c] += br[c];
  }
  Matrix sums = multiply(multiply(m, a.core), transpose(m));
  return normalize_block_sums(std::move(sums), sizes);
}

Matrix estimate_B(const SymOperator& a, std::span<const std::size_t> labels, std::size_t K) {
  check_length(a.dim(), labels.size());
  const auto sizes = cluster_sizes(labels, K);
  Matrix theta(a.dim(), K);
  for (std::size_t i = 0; i < a.dim(); ++i) theta(i, labels[i]) = 1.0;
  Matrix sums = multiply_at_b(theta, a.apply(theta));
  return normalize_block_sums(std::move(sums), sizes);
}

double b_error(const Matrix& b_est, const Matrix& b_true) {
  if (b_est.rows() != b_true.rows() || b_est.cols() != b_true.cols()) throw DimensionError("b_error: shape mismatch");
  double e = 0.0;
  auto x = b_est.data();
  auto y = b_true.data();
  for (std::size_t k = 0; k < x.size(); ++k) e = std::max(e, std::abs(x[k] - y[k]));
  return e;
}

double b_error(const Matrix& b_est, const Matrix& b_true, std::span<const std::size_t> permutation) {
  const std::size_t K = b_true.rows();
  if (b_est.rows() != K || b_est.cols() != K || b_true.cols() != K || permutation.size() != K)
    throw DimensionError("b_error: shape mismatch");
  Matrix aligned(K, K);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = 0; l < K; ++l) aligned(k, l) = b_est(permutation[k], permutation[l]);
  return b_error(aligned, b_true);
}

PairMetrics pair_metrics(std::span<const std::size_t> est, std::span<const std::size_t> ref) {
  if (est.size() != ref.size()) throw DimensionError("pair_metrics: label vectors differ in length");
  const double n = static_cast<double>(est.size());
  std::map<std::pair<std::size_t, std::size_t>, double> table;
  std::map<std::size_t, double> rows, cols;
  for (std::size_t i = 0; i < est.size(); ++i) {
    table[{est[i], ref[i]}] += 1.0;
    rows[est[i]] += 1.0;
    cols[ref[i]] += 1.0;
  }
  auto pairs = [](double c) { return c * (c - 1.0) / 2.0; };
  double tp = 0.0, pred = 0.0, truth = 0.0;
  for (const auto& [key, c] : table) tp += pairs(c);
  for (const auto& [key, c] : rows) pred += pairs(c);
  for (const auto& [key, c] : cols) truth += pairs(c);

  PairMetrics m;
  m.f1 = pred + truth == 0.0 ? 1.0 : 2.0 * tp / (pred + truth);

  const double total = pairs(n);
  const double expected = total > 0.0 ? pred * truth / total : 0.0;
  const double denom = 0.5 * (pred + truth) - expected;
  m.ari = denom == 0.0 ? 1.0 : (tp - expected) / denom;

  double h_est = 0.0, h_ref = 0.0, mi = 0.0;
  for (const auto& [key, c] : rows) h_est -= (c / n) * std::log(c / n);
  for (const auto& [key, c] : cols) h_ref -= (c / n) * std::log(c / n);
  for (const auto& [key, c] : table) mi += (c / n) * std::log(c * n / (rows[key.first] * cols[key.second]));
  const double h_mean = 0.5 * (h_est + h_ref);
  if (h_mean == 0.0) {
    m.nmi = 1.0;
  } else {
    m.nmi = std::clamp(mi / h_mean, 0.0, 1.0);
  }
  if (n == 0.0) m = {1.0, 1.0, 1.0};
  return m;
}

double deviation_norm(const SymOperator& approx, const SymOperator& population, std::uint64_t seed, double tol) {
  Rng rng(seed);
  try {
    return operator_norm(difference(approx, population), NormOptions{tol, 20000}, rng);
  } catch (const ConvergenceError& e) {
    warn(std::string("deviation_norm: ") + e.what() + "; using last estimate");
    return e.last_value();
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

const std::vector<std::string>& ExperimentReport::csv_columns() {
  static const std::vector<std::string> cols = {"grid_index", "grid_value", "method", "replication", "seed",
                                                "status",     "deviation",  "l1",     "b_err",       "f1",
                                                "nmi",        "ari",        "error"};
  return cols;
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

void ExperimentReport::write_rows_csv(std::ostream& out) const {
  const auto& cols = csv_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  for (const ReportRow& r : rows) {
    out << r.grid_index << ',' << csv_escape(r.grid_value) << ',' << r.method << ',' << r.replication << ','
        << r.seed << ',' << (r.ok ? "ok" : "failed") << ',' << opt(r.deviation) << ',' << opt(r.l1) << ','
        << opt(r.b_err) << ',' << opt(r.f1) << ',' << opt(r.nmi) << ',' << opt(r.ari) << ',' << csv_escape(r.error)
        << '\n';
  }
}

void ExperimentReport::write_timing_csv(std::ostream& out) const {
  out << "grid_index,grid_value,method,replication,stage,ms\n";
  for (const ReportRow& r : rows)
    for (const auto& [stage, ms] : r.stage_ms)
      out << r.grid_index << ',' << csv_escape(r.grid_value) << ',' << r.method << ',' << r.replication << ','
          << stage << ',' << format_double(ms) << '\n';
}

nlohmann::json ExperimentReport::aggregate() const {
  struct Acc {
    std::string grid_value;
    std::size_t ok = 0, failed = 0;
    std::map<std::string, std::vector<double>> values;
  };
  std::map<std::pair<std::size_t, std::string>, Acc> groups;
  for (const ReportRow& r : rows) {
    Acc& a = groups[{r.grid_index, r.method}];
    a.grid_value = r.grid_value;
    if (!r.ok) {
      ++a.failed;
      continue;
    }
    ++a.ok;
    auto add = [&](const char* name, const std::optional<double>& v) {
      if (v) a.values[name].push_back(*v);
    };
    add("deviation", r.deviation);
    add("l1", r.l1);
    add("b_err", r.b_err);
    add("f1", r.f1);
    add("nmi", r.nmi);
    add("ari", r.ari);
  }
  nlohmann::json groups_json = nlohmann::json::array();
  for (const auto& [key, a] : groups) {
    nlohmann::json g;
    g["grid_index"] = key.first;
    g["grid_value"] = a.grid_value;
    g["method"] = key.second;
    g["replications_ok"] = a.ok;
    g["replications_failed"] = a.failed;
    nlohmann::json metrics = nlohmann::json::object();
    for (const auto& [name, vals] : a.values) {
      double mean = 0.0;
      for (double v : vals) mean += v;
      mean /= static_cast<double>(vals.size());
      double ss = 0.0;
      for (double v : vals) ss += (v - mean) * (v - mean);
      const double sd = vals.size() > 1 ? std::sqrt(ss / static_cast<double>(vals.size() - 1)) : 0.0;
      metrics[name] = {{"mean", mean}, {"sd", sd}, {"count", vals.size()}};
    }
    g["metrics"] = std::move(metrics);
    groups_json.push_back(std::move(g));
  }
  return {{"axis", axis}, {"groups", std::move(groups_json)}};
}

}  // namespace rsclust
