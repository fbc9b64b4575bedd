#include "rsclust/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "rsclust/log.hpp"

namespace rsclust {

using nlohmann::json;

namespace {

std::string_view to_string(RunKind k) {
  switch (k) {
    case RunKind::synthetic: return "synthetic";
    case RunKind::real: return "real";
    case RunKind::timing: return "timing";
  }
  return "synthetic";
}

RunKind parse_kind(const std::string& s) {
  if (s == "synthetic") return RunKind::synthetic;
  if (s == "real") return RunKind::real;
  if (s == "timing") return RunKind::timing;
  throw ParameterError("unknown run kind '" + s + "'");
}

const std::vector<std::string> kAxes = {"none", "n", "alpha", "K", "p", "r", "q", "distribution"};
const std::vector<std::string> kMethods = {"plain", "rp", "rs"};

template <class T>
void read_opt(const json& doc, const char* key, T& out) {
  if (doc.contains(key) && !doc.at(key).is_null()) out = doc.at(key).get<T>();
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

bool is_method_axis(const std::string& axis) {
  return axis == "p" || axis == "r" || axis == "q" || axis == "distribution";
}

void RunConfig::validate() const {
  if (methods.empty()) throw ParameterError("at least one method is required");
  for (const auto& m : methods)
    if (std::find(kMethods.begin(), kMethods.end(), m) == kMethods.end())
      throw ParameterError("unknown method '" + m + "' (expected plain, rp or rs)");
  if (replications == 0) throw ParameterError("replications must be at least 1");
  if (std::find(kAxes.begin(), kAxes.end(), sweep.axis) == kAxes.end())
    throw ParameterError("unknown sweep axis '" + sweep.axis + "'");
  if (sweep.axis != "none" && (!sweep.values.is_array() || sweep.values.empty()))
    throw ParameterError("sweep axis '" + sweep.axis + "' needs a nonempty value grid");
  if (kind == RunKind::real) {
    if (dataset.edges.empty()) throw ParameterError("real runs need a dataset edge file");
    if (K == 0) throw ParameterError("real runs need K");
  } else if (K != 0) {
    throw ParameterError("K is set by the model for synthetic and timing runs; use model.K");
  }
  if (model.explicit_params && (sweep.axis == "n" || sweep.axis == "alpha" || sweep.axis == "K"))
    throw ParameterError("explicit SBM parameters cannot be swept along a model axis");
  if (target_rank > 0 && K > 0 && target_rank > K) throw ParameterError("target rank K' cannot exceed K");
}

json to_json(const RunConfig& cfg) {
  json doc;
  doc["kind"] = std::string(to_string(cfg.kind));
  if (!cfg.preset.empty()) doc["preset"] = cfg.preset;
  json model;
  if (cfg.model.explicit_params) {
    model["sbm"] = to_json(*cfg.model.explicit_params);
  } else {
    const auto& b = cfg.model.benchmark;
    model["name"] = b.name;
    model["n"] = b.n;
    if (b.name == "eq47") {
      model["K"] = b.K;
      model["alpha"] = b.alpha;
      model["lambda"] = b.lambda;
      if (cfg.model.alpha_scale) model["alpha_scale"] = *cfg.model.alpha_scale;
    }
  }
  doc["model"] = model;
  if (cfg.kind == RunKind::real) {
    json ds;
    ds["name"] = cfg.dataset.name;
    ds["edges"] = cfg.dataset.edges.string();
    if (cfg.dataset.labels) ds["labels"] = cfg.dataset.labels->string();
    ds["one_indexed"] = cfg.dataset.one_indexed;
    if (cfg.dataset.delimiter) ds["delimiter"] = std::string(1, *cfg.dataset.delimiter);
    ds["comment_prefix"] = cfg.dataset.comment_prefix;
    doc["dataset"] = ds;
  }
  doc["methods"] = cfg.methods;
  doc["K"] = cfg.K;
  doc["target_rank"] = cfg.target_rank;
  doc["variant"] = std::string(to_string(cfg.variant));
  doc["sketch"] = {{"oversampling", cfg.sketch.oversampling},
                   {"power", cfg.sketch.power},
                   {"distribution", std::string(to_string(cfg.sketch.distribution))},
                   {"selection", std::string(to_string(cfg.sketch.selection))}};
  doc["sampling"] = {{"mode", std::string(to_string(cfg.sampling.mode))},
                     {"p", cfg.sampling.p},
                     {"p_min", cfg.sampling.p_min},
                     {"target_mean", cfg.sampling.target_mean}};
  doc["kmeans"] = {{"restarts", cfg.kmeans.restarts}, {"max_iter", cfg.kmeans.max_iter}, {"tol", cfg.kmeans.tol}};
  doc["eigensolver"] = {{"tol", cfg.eigensolver.tol},
                        {"max_iter", cfg.eigensolver.max_iter},
                        {"extra", cfg.eigensolver.extra},
                        {"selection", std::string(to_string(cfg.eigensolver.selection))}};
  doc["sweep"] = {{"axis", cfg.sweep.axis}, {"values", cfg.sweep.values}};
  doc["replications"] = cfg.replications;
  doc["seed"] = cfg.seed;
  doc["threads"] = cfg.threads;
  doc["deviation"] = cfg.deviation;
  doc["deviation_tol"] = cfg.deviation_tol;
  doc["output_dir"] = cfg.output_dir.string();
  return doc;
}

RunConfig run_config_from_json(const json& doc) {
  if (!doc.is_object()) throw ParameterError("run config must be a JSON object");
  try {
    RunConfig cfg;
    if (doc.contains("preset")) cfg = preset(doc.at("preset").get<std::string>());
    if (doc.contains("kind")) cfg.kind = parse_kind(doc.at("kind").get<std::string>());
    if (doc.contains("model")) {
      const json& m = doc.at("model");
      if (m.contains("sbm")) {
        cfg.model.explicit_params = sbm_params_from_json(m.at("sbm"));
      } else {
        auto& b = cfg.model.benchmark;
        read_opt(m, "name", b.name);
        read_opt(m, "n", b.n);
        read_opt(m, "K", b.K);
        read_opt(m, "alpha", b.alpha);
        read_opt(m, "lambda", b.lambda);
        if (m.contains("alpha_scale")) {
          if (m.at("alpha_scale").is_null())
            cfg.model.alpha_scale.reset();
          else
            cfg.model.alpha_scale = m.at("alpha_scale").get<double>();
        }
      }
    }
    if (doc.contains("dataset")) {
      const json& d = doc.at("dataset");
      read_opt(d, "name", cfg.dataset.name);
      if (d.contains("edges")) cfg.dataset.edges = d.at("edges").get<std::string>();
      if (d.contains("labels") && !d.at("labels").is_null()) cfg.dataset.labels = d.at("labels").get<std::string>();
      read_opt(d, "one_indexed", cfg.dataset.one_indexed);
      read_opt(d, "comment_prefix", cfg.dataset.comment_prefix);
      if (d.contains("delimiter") && !d.at("delimiter").is_null()) {
        const auto s = d.at("delimiter").get<std::string>();
        if (s.size() != 1) throw ParameterError("delimiter must be a single character");
        cfg.dataset.delimiter = s[0];
      }
      if (cfg.dataset.name.empty()) cfg.dataset.name = cfg.dataset.edges.stem().string();
    }
    read_opt(doc, "methods", cfg.methods);
    read_opt(doc, "K", cfg.K);
    read_opt(doc, "target_rank", cfg.target_rank);
    if (doc.contains("variant")) cfg.variant = parse_variant(doc.at("variant").get<std::string>());
    if (doc.contains("sketch")) {
      const json& s = doc.at("sketch");
      read_opt(s, "oversampling", cfg.sketch.oversampling);
      read_opt(s, "power", cfg.sketch.power);
      if (s.contains("distribution"))
        cfg.sketch.distribution = parse_test_distribution(s.at("distribution").get<std::string>());
      if (s.contains("selection")) cfg.sketch.selection = parse_selection(s.at("selection").get<std::string>());
    }
    if (doc.contains("sampling")) {
      const json& s = doc.at("sampling");
      if (s.contains("mode")) cfg.sampling.mode = parse_sampling_mode(s.at("mode").get<std::string>());
      read_opt(s, "p", cfg.sampling.p);
      read_opt(s, "p_min", cfg.sampling.p_min);
      read_opt(s, "target_mean", cfg.sampling.target_mean);
      if (cfg.sampling.mode == SamplingMode::explicit_probs)
        throw ParameterError("explicit sampling probabilities are available through the library API only");
    }
    if (doc.contains("kmeans")) {
      const json& k = doc.at("kmeans");
      read_opt(k, "restarts", cfg.kmeans.restarts);
      read_opt(k, "max_iter", cfg.kmeans.max_iter);
      read_opt(k, "tol", cfg.kmeans.tol);
    }
    if (doc.contains("eigensolver")) {
      const json& e = doc.at("eigensolver");
      read_opt(e, "tol", cfg.eigensolver.tol);
      read_opt(e, "max_iter", cfg.eigensolver.max_iter);
      read_opt(e, "extra", cfg.eigensolver.extra);
      if (e.contains("selection")) cfg.eigensolver.selection = parse_selection(e.at("selection").get<std::string>());
    }
    if (doc.contains("sweep")) {
      const json& s = doc.at("sweep");
      read_opt(s, "axis", cfg.sweep.axis);
      if (s.contains("values")) cfg.sweep.values = s.at("values");
      if (cfg.sweep.axis == "none") cfg.sweep.values = json::array();
    }
    read_opt(doc, "replications", cfg.replications);
    read_opt(doc, "seed", cfg.seed);
    read_opt(doc, "threads", cfg.threads);
    read_opt(doc, "deviation", cfg.deviation);
    read_opt(doc, "deviation_tol", cfg.deviation_tol);
    if (doc.contains("output_dir")) cfg.output_dir = doc.at("output_dir").get<std::string>();
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw ParameterError(std::string("invalid run config: ") + e.what());
  }
}

std::vector<std::string> preset_names() {
  return {"experiment1", "experiment2", "experiment3", "experiment4", "model1", "model2",
          "model3",      "model4",      "model5",      "model6",      "fig7",   "fig7-q",
          "fig7-distribution", "fig8"};
}

RunConfig preset(const std::string& name) {
  RunConfig cfg;
  cfg.preset = name;
  cfg.kind = RunKind::synthetic;
  cfg.methods = {"plain", "rp", "rs"};
  cfg.replications = 20;
  cfg.sketch.oversampling = 10;
  cfg.sketch.power = 2;
  cfg.sketch.distribution = TestDistribution::gaussian;
  cfg.sampling.mode = SamplingMode::uniform;
  cfg.sampling.p = 0.7;
  auto& b = cfg.model.benchmark;
  b.name = "eq47";
  b.K = 3;
  b.alpha = 0.2;
  b.lambda = 0.5;
  b.n = 1152;

  if (name == "experiment1") {
    cfg.sweep = {"n", json::array({200, 400, 600, 800, 1000, 1200})};
  } else if (name == "experiment2") {
    cfg.sweep = {"alpha", json::array({0.1, 0.15, 0.2, 0.25, 0.3})};
  } else if (name == "experiment3") {
    cfg.sweep = {"K", json::array({2, 3, 4, 5, 6})};
  } else if (name == "experiment4") {
    b.K = 2;
    cfg.model.alpha_scale = 2.0;
    cfg.sweep = {"n", json::array({200, 400, 600, 800, 1000, 1200})};
  } else if (name.size() == 6 && name.starts_with("model") && name[5] >= '1' && name[5] <= '6') {
    b.name = name;
    b.n = 1200;
    if (name == "model3" || name == "model6") cfg.target_rank = 2;
    if (benchmark_is_degree_corrected(name)) cfg.variant = Variant::spherical;
    cfg.sweep = {"n", json::array({240, 480, 720, 960, 1200})};
  } else if (name == "fig7" || name == "fig7-q" || name == "fig7-distribution" || name == "fig8") {
    // Hyperparameter sweeps at n = 1152, K = 3, within-community 0.2, with a
    // between-community probability high enough that clustering is not trivial.
    b.lambda = 0.3;
    if (name == "fig8") {
      cfg.methods = {"rs"};
      cfg.sweep = {"p", json::array({0.6, 0.7, 0.8, 0.9})};
    } else {
      cfg.methods = {"rp"};
      if (name == "fig7") cfg.sweep = {"r", json::array({0, 4, 8, 12})};
      if (name == "fig7-q") cfg.sweep = {"q", json::array({2, 4, 6})};
      if (name == "fig7-distribution") cfg.sweep = {"distribution", json::array({"gaussian", "uniform", "rademacher"})};
    }
  } else {
    throw ParameterError("unknown preset '" + name + "'");
  }
  cfg.validate();
  return cfg;
}

namespace {

std::string value_label(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer() || v.is_number_unsigned()) return std::to_string(v.get<long long>());
  if (v.is_number_float()) return format_double(v.get<double>());
  return v.dump();
}

RunConfig apply_axis(RunConfig cfg, const std::string& axis, const json& v) {
  auto& b = cfg.model.benchmark;
  if (axis == "n") b.n = v.get<std::size_t>();
  else if (axis == "alpha") b.alpha = v.get<double>();
  else if (axis == "K") b.K = v.get<std::size_t>();
  else if (axis == "p") cfg.sampling.p = v.get<double>();
  else if (axis == "r") cfg.sketch.oversampling = v.get<std::size_t>();
  else if (axis == "q") cfg.sketch.power = v.get<std::size_t>();
  else if (axis == "distribution") cfg.sketch.distribution = parse_test_distribution(v.get<std::string>());
  return cfg;
}

SbmParams build_model(const RunConfig& cfg, Rng& rng) {
  if (cfg.model.explicit_params) return *cfg.model.explicit_params;
  BenchmarkSpec spec = cfg.model.benchmark;
  if (cfg.model.alpha_scale) spec.alpha = *cfg.model.alpha_scale / std::sqrt(static_cast<double>(spec.n));
  return make_benchmark_model(spec, rng);
}

ClusterOptions cluster_options(const RunConfig& cfg, std::size_t K, std::uint64_t seed) {
  ClusterOptions o;
  o.K = K;
  o.target_rank = cfg.target_rank;
  o.variant = cfg.variant;
  o.backend = Backend::exact;
  o.kmeans = cfg.kmeans;
  o.eigensolver = cfg.eigensolver;
  o.seed = seed;
  return o;
}

// Output of one method run: labels plus the approximation it clustered.
struct MethodRun {
  Clustering clustering;
  StageTimes stage_ms;
  std::optional<SparseSymGraph> sparse;   // plain: A itself is used
  std::optional<LowRankFactors> factors;  // rp: QCQᵀ, rs: UΣUᵀ
};

MethodRun run_method(const std::string& method, const RunConfig& cfg, const SparseSymGraph& a, std::size_t K,
                     std::uint64_t method_seed, bool keep_sparse) {
  const ClusterOptions opts = cluster_options(cfg, K, method_seed);
  MethodRun run;
  if (method == "plain") {
    SpectralResult r = spectral_cluster(as_operator(a), opts);
    run.clustering = std::move(r.clustering);
    run.stage_ms = std::move(r.stage_ms);
    if (keep_sparse) run.sparse = a;
  } else if (method == "rp") {
    SketchConfig sk = cfg.sketch;
    sk.seed = derive_seed(method_seed, {hash_tag("sketch")});
    RpResult r = rp_spectral_cluster(as_operator(a), opts, sk);
    run.clustering = std::move(r.clustering);
    run.stage_ms = std::move(r.stage_ms);
    run.factors = r.sketch.factors();
  } else {
    SamplingConfig sc = cfg.sampling;
    sc.seed = derive_seed(method_seed, {hash_tag("sampling")});
    RsGraphResult r = rs_spectral_cluster(a, opts, sc);
    run.clustering = std::move(r.clustering);
    run.stage_ms = std::move(r.stage_ms);
    run.factors = LowRankFactors::from_eigen(r.basis);
  }
  return run;
}

}  // namespace

namespace {

// Runs fn(0..count-1) on a small pool. The first exception is rethrown after
// all workers finish.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

void clear_metrics(ReportRow& row) {
  row.l1.reset();
  row.b_err.reset();
  row.f1.reset();
  row.nmi.reset();
  row.ari.reset();
  row.deviation.reset();
}

std::vector<ReportRow> synthetic_replication(const RunConfig& cfg, const RunConfig& point, std::size_t gi,
                                             const std::string& label, std::uint64_t stream, std::size_t rep) {
  std::vector<ReportRow> rows;
  std::optional<SbmParams> params;
  std::optional<SparseSymGraph> graph;
  std::string model_error;
  try {
    Rng model_rng(derive_seed(cfg.seed, {stream, rep, hash_tag("model")}));
    params = build_model(point, model_rng);
    graph = sample_graph(*params, model_rng);
  } catch (const Error& e) {
    model_error = std::string(e.kind()) + ": " + e.what();
  }

  for (const std::string& method : cfg.methods) {
    ReportRow row;
    row.grid_value = label;
    row.grid_index = gi;
    row.method = method;
    row.replication = rep;
    row.seed = derive_seed(cfg.seed, {stream, rep, hash_tag(method)});
    if (!graph) {
      row.ok = false;
      row.error = model_error;
      rows.push_back(std::move(row));
      continue;
    }
    try {
      const std::size_t K = params->K;
      MethodRun run = run_method(method, point, *graph, K, row.seed, true);
      row.stage_ms = run.stage_ms;

      auto t0 = std::chrono::steady_clock::now();
      const L1Result l1 = misclassification_l1(run.clustering.labels, params->g, K);
      Matrix b_est = run.factors ? estimate_B(*run.factors, run.clustering.labels, K) : estimate_B(*run.sparse, run.clustering.labels, K);
      const PairMetrics pm = pair_metrics(run.clustering.labels, params->g);
      row.l1 = l1.value;
      row.b_err = b_error(b_est, params->B, l1.permutation);
      row.f1 = pm.f1;
      row.nmi = pm.nmi;
      row.ari = pm.ari;
      row.stage_ms["evaluate"] = elapsed_ms(t0);

      if (cfg.deviation) {
        t0 = std::chrono::steady_clock::now();
        const SymOperator pop = population_operator(*params);
        const std::uint64_t norm_seed = derive_seed(row.seed, {hash_tag("deviation")});
        row.deviation = run.factors ? deviation_norm(as_operator(*run.factors), pop, norm_seed, cfg.deviation_tol)
                                    : deviation_norm(as_operator(*run.sparse), pop, norm_seed, cfg.deviation_tol);
        row.stage_ms["deviation"] = elapsed_ms(t0);
      }
    } catch (const Error& e) {
      row.ok = false;
      row.error = std::string(e.kind()) + ": " + e.what();
      clear_metrics(row);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

ExperimentReport run_synthetic(const RunConfig& cfg) {
  cfg.validate();
  ExperimentReport report;
  report.axis = cfg.sweep.axis;
  const bool swept = cfg.sweep.axis != "none";
  const std::size_t points = swept ? cfg.sweep.values.size() : 1;
  const bool crn = is_method_axis(cfg.sweep.axis);

  for (std::size_t gi = 0; gi < points; ++gi) {
    const RunConfig point = swept ? apply_axis(cfg, cfg.sweep.axis, cfg.sweep.values[gi]) : cfg;
    const std::string label = swept ? value_label(cfg.sweep.values[gi]) : std::string();
    const std::uint64_t stream = crn ? 0 : gi;

    std::vector<std::vector<ReportRow>> slots(cfg.replications);
    parallel_for(cfg.replications, cfg.threads, [&](std::size_t rep) {
      slots[rep] = synthetic_replication(cfg, point, gi, label, stream, rep);
    });
    std::size_t failed = 0, total = 0;
    for (auto& slot : slots)
      for (auto& row : slot) {
        ++total;
        failed += row.ok ? 0 : 1;
        report.rows.push_back(std::move(row));
      }
    if (2 * failed > total)
      throw RunAborted("grid point " + (label.empty() ? std::to_string(gi) : cfg.sweep.axis + "=" + label) + ": " +
                       std::to_string(failed) + " of " + std::to_string(total) + " runs failed");
  }
  return report;
}

std::vector<std::size_t> load_labels(const std::filesystem::path& path, std::span<const std::int64_t> original_ids) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open label file '" + path.string() + "'");
  std::vector<std::pair<std::int64_t, std::int64_t>> keyed;
  std::vector<std::int64_t> plain;
  std::string line;
  std::size_t line_no = 0;
  int columns = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    const int c = tok.size() >= 2 ? 2 : 1;
    if (columns == 0) columns = c;
    if (c != columns) throw ParseError("label file mixes one- and two-column lines", line_no);
    try {
      std::size_t used = 0;
      if (c == 2) {
        const std::int64_t id = std::stoll(tok[0], &used);
        if (used != tok[0].size()) throw std::invalid_argument("id");
        const std::int64_t lab = std::stoll(tok[1], &used);
        if (used != tok[1].size()) throw std::invalid_argument("label");
        keyed.emplace_back(id, lab);
      } else {
        const std::int64_t lab = std::stoll(tok[0], &used);
        if (used != tok[0].size()) throw std::invalid_argument("label");
        plain.push_back(lab);
      }
    } catch (const std::logic_error&) {
      throw ParseError("expected integer label line", line_no);
    }
  }

  const std::size_t n = original_ids.size();
  std::vector<std::int64_t> raw(n);
  if (columns == 2) {
    std::map<std::int64_t, std::int64_t> by_id;
    for (const auto& [id, lab] : keyed) {
      auto [it, inserted] = by_id.emplace(id, lab);
      if (!inserted && it->second != lab) throw ParameterError("node " + std::to_string(id) + " has two labels");
    }
    std::size_t covered = 0;
    for (std::size_t i = 0; i < n; ++i) {
      auto it = by_id.find(original_ids[i]);
      if (it != by_id.end()) {
        raw[i] = it->second;
        ++covered;
      }
    }
    if (covered != n)
      throw ParameterError("label file covers " + std::to_string(covered) + " of " + std::to_string(n) + " nodes");
  } else {
    if (plain.size() != n)
      throw ParameterError("label file has " + std::to_string(plain.size()) + " labels but the graph has " +
                           std::to_string(n) + " nodes");
    raw = std::move(plain);
  }
  std::vector<std::int64_t> distinct = raw;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i)
    labels[i] = static_cast<std::size_t>(std::lower_bound(distinct.begin(), distinct.end(), raw[i]) - distinct.begin());
  return labels;
}

ExperimentReport run_real(const RunConfig& cfg) {
  cfg.validate();
  EdgeListOptions opts;
  opts.one_indexed = cfg.dataset.one_indexed;
  opts.delimiter = cfg.dataset.delimiter;
  opts.comment_prefix = cfg.dataset.comment_prefix;
  const EdgeListResult data = load_edge_list(cfg.dataset.edges, opts);
  if (data.isolated_nodes > 0)
    warn(std::to_string(data.isolated_nodes) + " isolated node(s) retained in '" + cfg.dataset.name + "'");
  const std::size_t K = cfg.K;
  if (K > data.graph.num_nodes())
    throw ParameterError("K = " + std::to_string(K) + " exceeds the node count " + std::to_string(data.graph.num_nodes()));

  std::optional<std::vector<std::size_t>> truth;
  if (cfg.dataset.labels) truth = load_labels(*cfg.dataset.labels, data.original_ids);
  const bool l1_ok = truth && !truth->empty() && *std::max_element(truth->begin(), truth->end()) + 1 == K;

  ExperimentReport report;
  report.axis = truth ? "dataset" : "dataset_relative";
  std::vector<std::vector<ReportRow>> slots(cfg.replications);
  parallel_for(cfg.replications, cfg.threads, [&](std::size_t rep) {
    std::optional<std::vector<std::size_t>> reference = truth;
    std::string reference_error;
    if (!truth) {
      try {
        reference = run_method("plain", cfg, data.graph, K, derive_seed(cfg.seed, {0, rep, hash_tag("plain")}), false)
                        .clustering.labels;
      } catch (const Error& e) {
        reference_error = std::string("reference plain run failed: ") + e.what();
      }
    }
    for (const std::string& method : cfg.methods) {
      if (!truth && method == "plain") continue;  // relative to itself
      ReportRow row;
      row.grid_value = cfg.dataset.name;
      row.method = method;
      row.replication = rep;
      row.seed = derive_seed(cfg.seed, {0, rep, hash_tag(method)});
      try {
        if (!reference) throw Error(reference_error);
        MethodRun run = run_method(method, cfg, data.graph, K, row.seed, false);
        row.stage_ms = run.stage_ms;
        const PairMetrics pm = pair_metrics(run.clustering.labels, *reference);
        row.f1 = pm.f1;
        row.nmi = pm.nmi;
        row.ari = pm.ari;
        if (l1_ok) row.l1 = misclassification_l1(run.clustering.labels, *truth, K).value;
      } catch (const Error& e) {
        row.ok = false;
        row.error = std::string(e.kind()) + ": " + e.what();
        clear_metrics(row);
      }
      slots[rep].push_back(std::move(row));
    }
  });
  std::size_t failed = 0, total = 0;
  for (auto& slot : slots)
    for (auto& row : slot) {
      ++total;
      failed += row.ok ? 0 : 1;
      report.rows.push_back(std::move(row));
    }
  if (2 * failed > total)
    throw RunAborted(cfg.dataset.name + ": " + std::to_string(failed) + " of " + std::to_string(total) + " runs failed");
  return report;
}

double TimingRow::median_ms() const {
  if (samples_ms.empty()) return 0.0;
  std::vector<double> s = samples_ms;
  std::sort(s.begin(), s.end());
  const std::size_t m = s.size() / 2;
  return s.size() % 2 ? s[m] : 0.5 * (s[m - 1] + s[m]);
}

void TimingReport::write_csv(std::ostream& out) const {
  out << "method,stage,median_ms,runs\n";
  for (const TimingRow& r : rows)
    out << r.method << ',' << r.stage << ',' << format_double(r.median_ms()) << ',' << r.samples_ms.size() << '\n';
}

json TimingReport::to_json() const {
  json rows_json = json::array();
  for (const TimingRow& r : rows)
    rows_json.push_back({{"method", r.method}, {"stage", r.stage}, {"median_ms", r.median_ms()}, {"samples_ms", r.samples_ms}});
  return {{"machine", machine}, {"timings", rows_json}};
}

TimingReport run_timing(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.sweep.axis != "none") throw ParameterError("timing runs take a single model point; remove the sweep");
  TimingReport report;
  std::map<std::pair<std::string, std::string>, std::vector<double>> samples;
  std::vector<std::pair<std::string, std::string>> order;
  auto record = [&](const std::string& method, const std::string& stage, double ms) {
    auto key = std::make_pair(method, stage);
    if (!samples.count(key)) order.push_back(key);
    samples[key].push_back(ms);
  };

  std::size_t n = 0, nnz = 0;
  for (std::size_t rep = 0; rep < cfg.replications; ++rep) {
    Rng model_rng(derive_seed(cfg.seed, {0, rep, hash_tag("model")}));
    const SbmParams params = build_model(cfg, model_rng);
    const SparseSymGraph graph = sample_graph(params, model_rng);
    n = graph.num_nodes();
    nnz = graph.nnz();
    for (const std::string& method : cfg.methods) {
      MethodRun run = run_method(method, cfg, graph, params.K, derive_seed(cfg.seed, {0, rep, hash_tag(method)}), false);
      double total = 0.0;
      for (const auto& [stage, ms] : run.stage_ms) {
        record(method, stage, ms);
        total += ms;
      }
      if (method == "rs") {
        record(method, "total_with_sampling", total);
        record(method, "total_without_sampling", total - run.stage_ms["sparsify"]);
      } else {
        record(method, "total", total);
      }
    }
  }
  for (const auto& key : order) report.rows.push_back({key.first, key.second, samples[key]});
  report.machine = {{"hardware_threads", std::thread::hardware_concurrency()},
                    {"compiler", __VERSION__},
                    {"n", n},
                    {"nnz", nnz},
                    {"replications", cfg.replications}};
  return report;
}

namespace {

std::ofstream open_output(const std::filesystem::path& dir, const char* name) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / name);
  if (!out) throw Error("cannot write '" + (dir / name).string() + "'");
  return out;
}

}  // namespace

void write_report(const RunConfig& cfg, const ExperimentReport& report) {
  {
    auto out = open_output(cfg.output_dir, "rows.csv");
    report.write_rows_csv(out);
  }
  {
    auto out = open_output(cfg.output_dir, "timing.csv");
    report.write_timing_csv(out);
  }
  {
    auto out = open_output(cfg.output_dir, "aggregate.json");
    json agg = report.aggregate();
    agg["config"] = to_json(cfg);
    out << agg.dump(2) << '\n';
  }
}

void write_timing_report(const RunConfig& cfg, const TimingReport& report) {
  {
    auto out = open_output(cfg.output_dir, "timing.csv");
    report.write_csv(out);
  }
  {
    auto out = open_output(cfg.output_dir, "aggregate.json");
    json agg = report.to_json();
    agg["config"] = to_json(cfg);
    out << agg.dump(2) << '\n';
  }
}

Clustering cluster_dataset(const RunConfig& cfg, const SparseSymGraph& graph, const std::string& method,
                           std::size_t replication) {
  if (std::find(kMethods.begin(), kMethods.end(), method) == kMethods.end())
    throw ParameterError("unknown method '" + method + "' (expected plain, rp or rs)");
  if (cfg.K == 0 || cfg.K > graph.num_nodes()) throw ParameterError("K must lie in [1, n]");
  return run_method(method, cfg, graph, cfg.K, derive_seed(cfg.seed, {0, replication, hash_tag(method)}), false)
      .clustering;
}

}  // namespace rsclust
