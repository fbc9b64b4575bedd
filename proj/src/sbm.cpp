#include "rsclust/sbm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

#include "rsclust/error.hpp"
#include "rsclust/linalg.hpp"

namespace rsclust {

std::vector<std::size_t> contiguous_membership(const std::vector<std::size_t>& sizes) {
  std::vector<std::size_t> g;
  for (std::size_t k = 0; k < sizes.size(); ++k) g.insert(g.end(), sizes[k], k);
  return g;
}

SbmParams make_sbm(std::vector<std::size_t> g, Matrix B, std::optional<std::vector<double>> vartheta) {
  SbmParams p;
  p.n = g.size();
  p.K = B.rows();
  p.g = std::move(g);
  p.B = std::move(B);
  p.vartheta = std::move(vartheta);
  p.validate();
  return p;
}

void SbmParams::validate() const {
  if (K == 0) throw ParameterError("SBM needs at least one community");
  if (B.rows() != K || B.cols() != K) throw ParameterError("B must be K x K");
  if (g.size() != n) throw ParameterError("membership length " + std::to_string(g.size()) + " differs from n " + std::to_string(n));
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = 0; l < K; ++l) {
      const double v = B(k, l);
      if (!(v >= 0.0 && v <= 1.0)) throw ParameterError("B entries must lie in [0, 1]");
      if (v != B(l, k)) throw ParameterError("B must be symmetric");
    }
  std::vector<std::size_t> sizes(K, 0);
  for (std::size_t c : g) {
    if (c >= K) throw ParameterError("membership label out of range");
    ++sizes[c];
  }
  for (std::size_t k = 0; k < K; ++k)
    if (sizes[k] == 0) throw ParameterError("community " + std::to_string(k) + " is empty");
  if (vartheta) {
    if (vartheta->size() != n) throw ParameterError("vartheta length differs from n");
    std::vector<double> max_in(K, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = (*vartheta)[i];
      if (!(t > 0.0 && t <= 1.0)) throw ParameterError("vartheta entries must lie in (0, 1]");
      max_in[g[i]] = std::max(max_in[g[i]], t);
    }
    for (std::size_t k = 0; k < K; ++k)
      if (max_in[k] != 1.0) throw ParameterError("vartheta must reach 1 within community " + std::to_string(k));
  }
}

std::vector<std::size_t> SbmParams::community_sizes() const {
  std::vector<std::size_t> sizes(K, 0);
  for (std::size_t c : g) ++sizes[c];
  return sizes;
}

std::size_t SbmParams::target_rank(double rank_tol) const {
  EigenBasis e = dense_sym_eig(DenseSymMatrix::from_full(B));
  double top = 0.0;
  for (double v : e.values) top = std::max(top, std::abs(v));
  if (top == 0.0) return 0;
  std::size_t r = 0;
  for (double v : e.values)
    if (std::abs(v) > rank_tol * top) ++r;
  return r;
}

namespace {

SparseSymGraph sample_pairs(const SbmParams& params, Rng& rng, bool corrected) {
  const std::size_t n = params.n;
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t gi = params.g[i];
    const double ti = corrected ? (*params.vartheta)[i] : 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double p = params.B(gi, params.g[j]);
      if (corrected) p *= ti * (*params.vartheta)[j];
      if (p > 1.0)
        throw ParameterError("edge probability above 1 for community pair (" + std::to_string(gi) + ", " +
                             std::to_string(params.g[j]) + ")");
      if (rng.uniform() < p) edges.push_back({i, j, 1.0});
    }
  }
  return SparseSymGraph::from_edges(n, std::move(edges));
}

}  // namespace

SparseSymGraph sample_sbm(const SbmParams& params, Rng& rng) {
  params.validate();
  if (params.vartheta) throw ParameterError("sample_sbm: parameters carry vartheta; use sample_dcsbm");
  return sample_pairs(params, rng, false);
}

SparseSymGraph sample_dcsbm(const SbmParams& params, Rng& rng) {
  params.validate();
  if (!params.vartheta) throw ParameterError("sample_dcsbm: parameters have no vartheta");
  return sample_pairs(params, rng, true);
}

SparseSymGraph sample_graph(const SbmParams& params, Rng& rng) {
  return params.vartheta ? sample_dcsbm(params, rng) : sample_sbm(params, rng);
}

DenseSymMatrix population_matrix(const SbmParams& params, std::size_t dense_cap) {
  params.validate();
  if (params.n > dense_cap)
    throw ParameterError("population_matrix: n = " + std::to_string(params.n) + " exceeds the dense cap " +
                         std::to_string(dense_cap));
  DenseSymMatrix p(params.n);
  for (std::size_t i = 0; i < params.n; ++i)
    for (std::size_t j = i; j < params.n; ++j) {
      double v = params.B(params.g[i], params.g[j]);
      if (params.vartheta) v *= (*params.vartheta)[i] * (*params.vartheta)[j];
      p.set(i, j, v);
    }
  return p;
}

SymOperator population_operator(const SbmParams& params) {
  params.validate();
  auto p = std::make_shared<const SbmParams>(params);
  return SymOperator(params.n, [p](const Matrix& x) {
    const std::size_t n = p->n, K = p->K, l = x.cols();
    auto theta = [&](std::size_t i) { return p->vartheta ? (*p->vartheta)[i] : 1.0; };
    // s = Θᵀ diag(ϑ) x, then t = B s, then y_i = ϑ_i t_{g_i}.
    Matrix s(K, l);
    for (std::size_t i = 0; i < n; ++i) {
      auto xr = x.row(i);
      auto sr = s.row(p->g[i]);
      const double t = theta(i);
      for (std::size_t c = 0; c < l; ++c) sr[c] += t * xr[c];
    }
    Matrix t = multiply(p->B, s);
    Matrix y(n, l);
    for (std::size_t i = 0; i < n; ++i) {
      auto tr = t.row(p->g[i]);
      auto yr = y.row(i);
      const double th = theta(i);
      for (std::size_t c = 0; c < l; ++c) yr[c] = th * tr[c];
    }
    return y;
  });
}

PopulationEigen population_eigens(const SbmParams& params, double rank_tol) {
  params.validate();
  const std::size_t K = params.K;
  PopulationEigen out;
  out.omega.assign(K, 0.0);
  for (std::size_t i = 0; i < params.n; ++i) {
    const double t = params.vartheta ? (*params.vartheta)[i] : 1.0;
    out.omega[params.g[i]] += t * t;
  }
  for (double& w : out.omega) w = std::sqrt(w);

  out.B_bar = Matrix(K, K);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = 0; l < K; ++l) out.B_bar(k, l) = out.omega[k] * params.B(k, l) * out.omega[l];
  EigenBasis small = dense_sym_eig(DenseSymMatrix::symmetrize(out.B_bar));

  double top = 0.0;
  for (double v : small.values) top = std::max(top, std::abs(v));
  if (top == 0.0) throw EmptyRangeError("population_eigens: B is numerically zero");
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < K; ++k)
    if (std::abs(small.values[k]) > rank_tol * top) keep.push_back(k);

  out.H = small.vectors.select_columns(keep);
  for (std::size_t k : keep) {
    out.basis.values.push_back(small.values[k]);
    if (small.values[k] <= 0.0) out.positive = false;
  }
  const std::size_t r = keep.size();
  out.basis.vectors = Matrix(params.n, r);
  for (std::size_t i = 0; i < params.n; ++i) {
    const std::size_t k = params.g[i];
    const double scale = (params.vartheta ? (*params.vartheta)[i] : 1.0) / out.omega[k];
    for (std::size_t c = 0; c < r; ++c) out.basis.vectors(i, c) = scale * out.H(k, c);
  }
  return out;
}

constexpr double kBoundSlack = 1e-10;

ModelDiagnostics diagnostics(const SbmParams& params, double rank_tol) {
  PopulationEigen pe = population_eigens(params, rank_tol);
  const std::size_t K = params.K;
  const auto& sigma = pe.basis.values;
  ModelDiagnostics d;
  d.K = K;
  d.target_rank = sigma.size();
  d.degree_corrected = params.degree_corrected();
  d.positive_spectrum = pe.positive;
  d.sigma_n = sigma.front();
  d.gamma_n = std::numeric_limits<double>::infinity();
  for (double v : sigma) d.gamma_n = std::min(d.gamma_n, std::abs(v));
  for (double v : params.B.data()) d.alpha_n = std::max(d.alpha_n, v);

  const auto sizes = params.community_sizes();
  d.delta_1n = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = 0; l < K; ++l)
      if (k != l) d.delta_1n = std::min(d.delta_1n, std::sqrt(1.0 / sizes[k] + 1.0 / sizes[l]));
  if (K == 1) d.delta_1n = 0.0;
  d.delta_n = d.delta_1n;
  const bool deficient = d.target_rank < K;
  const std::size_t r = d.target_rank;

  if (!d.degree_corrected) {
    // Rows of U are H_k / omega_k per community.
    d.exact_separation = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t l = k + 1; l < K; ++l) {
        double s = 0.0;
        for (std::size_t c = 0; c < r; ++c) {
          const double diff = pe.H(k, c) / pe.omega[k] - pe.H(l, c) / pe.omega[l];
          s += diff * diff;
        }
        d.exact_separation = std::min(d.exact_separation, std::sqrt(s));
      }
    if (K == 1) d.exact_separation = 0.0;
    d.eta_n = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t l = k + 1; l < K; ++l)
        d.eta_n = std::min(d.eta_n, params.B(k, k) + params.B(l, l) - 2.0 * params.B(k, l));
    if (K == 1) d.eta_n = 0.0;
    if (deficient) {
      d.iota_n = d.sigma_n;
      d.hypothesis_holds = d.eta_n > 0.0 && pe.positive;
      d.xi_n = d.hypothesis_holds ? std::sqrt(d.eta_n / d.iota_n) : 0.0;
      d.delta_n = d.xi_n;
      // With K' = 1 the bound is attained exactly, so allow rounding.
      d.bound_satisfied = !d.hypothesis_holds || d.exact_separation >= d.xi_n * (1.0 - kBoundSlack);
    }
    return d;
  }

  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t l = k + 1; l < K; ++l) {
      double dotp = 0.0, nk = 0.0, nl = 0.0;
      for (std::size_t c = 0; c < r; ++c) {
        dotp += pe.H(k, c) * pe.H(l, c);
        nk += pe.H(k, c) * pe.H(k, c);
        nl += pe.H(l, c) * pe.H(l, c);
      }
      const double denom = std::sqrt(nk * nl);
      const double cosine = denom > 0.0 ? dotp / denom : 1.0;
      d.max_cross_cosine = std::max(d.max_cross_cosine, cosine);
    }
  if (deficient) {
    const Matrix& bb = pe.B_bar;
    d.eta_prime_n = std::numeric_limits<double>::infinity();
    double min_diag = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < K; ++k) {
      d.beta_n = std::max(d.beta_n, bb(k, k));
      min_diag = std::min(min_diag, bb(k, k));
      for (std::size_t l = k + 1; l < K; ++l)
        d.eta_prime_n = std::min(d.eta_prime_n, bb(k, k) * bb(l, l) - bb(k, l) * bb(k, l));
    }
    d.iota_lower = d.gamma_n;
    d.iota_upper = d.sigma_n;
    d.hypothesis_holds = d.eta_prime_n > 0.0 && min_diag > 0.0 && pe.positive;
    if (d.hypothesis_holds) {
      const double ratio = d.eta_prime_n / (d.iota_upper * d.beta_n * d.beta_n / d.iota_lower);
      d.xi_prime_n = std::sqrt(std::max(0.0, 1.0 - ratio));
    }
    d.bound_satisfied = !d.hypothesis_holds || d.max_cross_cosine <= d.xi_prime_n + kBoundSlack;
  }
  return d;
}

SbmParams make_eq47(std::size_t n, std::size_t K, double alpha, double lambda) {
  if (K == 0 || n < K) throw ParameterError("eq47 model needs 1 <= K <= n");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterError("eq47 model needs alpha in (0, 1]");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ParameterError("eq47 model needs lambda in [0, 1]");
  std::vector<std::size_t> sizes(K, n / K);
  for (std::size_t k = 0; k < n % K; ++k) ++sizes[k];
  Matrix B(K, K, alpha * (1.0 - lambda));
  for (std::size_t k = 0; k < K; ++k) B(k, k) = alpha * lambda + alpha * (1.0 - lambda);
  return make_sbm(contiguous_membership(sizes), std::move(B));
}

bool benchmark_is_degree_corrected(std::string_view name) {
  return name == "model4" || name == "model5" || name == "model6";
}

namespace {

Matrix random_b(Rng& rng, double dlo, double dhi, double olo, double ohi) {
  Matrix B(3, 3);
  for (std::size_t k = 0; k < 3; ++k) B(k, k) = dlo + (dhi - dlo) * rng.uniform();
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t l = k + 1; l < 3; ++l) B(k, l) = B(l, k) = olo + (ohi - olo) * rng.uniform();
  return B;
}

Matrix rank_two_b() {
  const double pi = std::numbers::pi;
  const double c[3][2] = {{2.0 * std::sin(0.0) / 3.0, 2.0 * std::cos(0.0) / 3.0},
                          {std::sin(pi / 5.0) / 2.0, std::cos(pi / 5.0) / 2.0},
                          {5.0 * std::sin(2.0 * pi / 5.0) / 6.0, 5.0 * std::cos(2.0 * pi / 5.0) / 6.0}};
  Matrix B(3, 3);
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t l = 0; l < 3; ++l) B(k, l) = c[k][0] * c[l][0] + c[k][1] * c[l][1];
  // Exact symmetry regardless of rounding order.
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t l = k + 1; l < 3; ++l) B(l, k) = B(k, l);
  return B;
}

std::vector<double> draw_vartheta(const std::vector<std::size_t>& g, std::size_t K, Rng& rng, bool heavy) {
  std::vector<double> t(g.size());
  for (double& v : t) {
    const double u = rng.uniform();
    if (heavy)
      v = u < 0.4 ? 0.1 : (u < 0.8 ? 0.2 : 1.0);
    else
      v = u < 0.8 ? 0.2 : 1.0;
  }
  std::vector<double> max_in(K, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) max_in[g[i]] = std::max(max_in[g[i]], t[i]);
  for (std::size_t i = 0; i < g.size(); ++i) t[i] /= max_in[g[i]];
  return t;
}

}  // namespace

SbmParams make_benchmark_model(const BenchmarkSpec& spec, Rng& rng) {
  const std::size_t n = spec.n;
  if (spec.name == "eq47") return make_eq47(n, spec.K, spec.alpha, spec.lambda);

  const bool model2 = spec.name == "model2";
  if (model2) {
    if (n == 0 || n % 6 != 0) throw ParameterError("model2 needs n divisible by 6, got " + std::to_string(n));
  } else if (n == 0 || n % 3 != 0) {
    throw ParameterError(spec.name + " needs n divisible by 3, got " + std::to_string(n));
  }
  const std::vector<std::size_t> sizes = model2 ? std::vector<std::size_t>{n / 6, n / 2, n / 3}
                                                : std::vector<std::size_t>{n / 3, n / 3, n / 3};
  auto g = contiguous_membership(sizes);

  if (spec.name == "model1" || model2) return make_sbm(std::move(g), random_b(rng, 0.2, 0.3, 0.01, 0.1));
  if (spec.name == "model3") return make_sbm(std::move(g), rank_two_b());
  if (spec.name == "model4" || spec.name == "model5") {
    Matrix B = random_b(rng, 0.4, 0.6, 0.01, 0.2);
    auto t = draw_vartheta(g, 3, rng, spec.name == "model5");
    return make_sbm(std::move(g), std::move(B), std::move(t));
  }
  if (spec.name == "model6") {
    auto t = draw_vartheta(g, 3, rng, false);
    return make_sbm(std::move(g), rank_two_b(), std::move(t));
  }
  throw ParameterError("unknown benchmark model '" + spec.name + "'");
}

nlohmann::json to_json(const SbmParams& params) {
  nlohmann::json doc;
  doc["n"] = params.n;
  doc["K"] = params.K;
  doc["g"] = params.g;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t k = 0; k < params.K; ++k) {
    auto r = params.B.row(k);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  doc["B"] = rows;
  if (params.vartheta) doc["vartheta"] = *params.vartheta;
  return doc;
}

SbmParams sbm_params_from_json(const nlohmann::json& doc) {
  try {
    if (!doc.is_object()) throw ParameterError("SBM parameters must be a JSON object");
    std::vector<std::size_t> g;
    if (doc.contains("g")) {
      g = doc.at("g").get<std::vector<std::size_t>>();
    } else if (doc.contains("community_sizes")) {
      g = contiguous_membership(doc.at("community_sizes").get<std::vector<std::size_t>>());
    } else {
      throw ParameterError("SBM parameters need 'g' or 'community_sizes'");
    }
    const auto& jb = doc.at("B");
    std::vector<double> flat;
    std::size_t K = 0;
    if (!jb.empty() && jb.front().is_array()) {
      K = jb.size();
      for (const auto& row : jb) {
        if (row.size() != K) throw ParameterError("B must be square");
        for (const auto& v : row) flat.push_back(v.get<double>());
      }
    } else {
      flat = jb.get<std::vector<double>>();
      K = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(flat.size()))));
      if (K * K != flat.size()) throw ParameterError("flat B must have K*K entries");
    }
    if (doc.contains("K") && doc.at("K").get<std::size_t>() != K)
      throw ParameterError("'K' does not match the size of B");
    if (doc.contains("n") && doc.at("n").get<std::size_t>() != g.size())
      throw ParameterError("'n' does not match the membership length");
    Matrix B(K, K);
    std::copy(flat.begin(), flat.end(), B.data().begin());
    std::optional<std::vector<double>> t;
    if (doc.contains("vartheta") && !doc.at("vartheta").is_null()) t = doc.at("vartheta").get<std::vector<double>>();
    return make_sbm(std::move(g), std::move(B), std::move(t));
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("invalid SBM parameters: ") + e.what());
  }
}

}  // namespace rsclust
