#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rsclust/clustering.hpp"
#include "rsclust/evaluate.hpp"
#include "rsclust/experiment.hpp"
#include "rsclust/sbm.hpp"

namespace py = pybind11;
using namespace rsclust;

namespace {

using IndexArray = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;
using WeightArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<std::size_t> to_labels(const IndexArray& a) {
  if (a.ndim() != 1) throw DimensionError("labels must be one-dimensional");
  std::vector<std::size_t> out(a.size());
  auto v = a.unchecked<1>();
  for (py::ssize_t i = 0; i < a.size(); ++i) {
    if (v(i) < 0) throw ParameterError("labels must be non-negative");
    out[i] = static_cast<std::size_t>(v(i));
  }
  return out;
}

SparseSymGraph to_graph(std::size_t n, const IndexArray& edges, const std::optional<WeightArray>& weights) {
  if (edges.ndim() != 2 || (edges.shape(0) > 0 && edges.shape(1) != 2))
    throw DimensionError("edges must have shape (m, 2)");
  const auto m = static_cast<std::size_t>(edges.shape(0));
  if (weights && (weights->ndim() != 1 || static_cast<std::size_t>(weights->size()) != m))
    throw DimensionError("weights must have one entry per edge");
  std::vector<Edge> list;
  list.reserve(m);
  auto e = edges.unchecked<2>();
  for (std::size_t k = 0; k < m; ++k) {
    if (e(k, 0) < 0 || e(k, 1) < 0) throw ParameterError("node indices must be non-negative");
    list.push_back({static_cast<std::size_t>(e(k, 0)), static_cast<std::size_t>(e(k, 1)),
                    weights ? weights->at(k) : 1.0});
  }
  return SparseSymGraph::from_edges(n, std::move(list));
}

py::tuple graph_arrays(const SparseSymGraph& g) {
  const auto edges = g.edges();
  IndexArray ij({static_cast<py::ssize_t>(edges.size()), py::ssize_t{2}});
  WeightArray w(static_cast<py::ssize_t>(edges.size()));
  auto a = ij.mutable_unchecked<2>();
  auto b = w.mutable_unchecked<1>();
  for (std::size_t k = 0; k < edges.size(); ++k) {
    a(k, 0) = static_cast<std::int64_t>(edges[k].i);
    a(k, 1) = static_cast<std::int64_t>(edges[k].j);
    b(k) = edges[k].w;
  }
  return py::make_tuple(g.num_nodes(), ij, w);
}

IndexArray label_array(const std::vector<std::size_t>& labels) {
  IndexArray out(static_cast<py::ssize_t>(labels.size()));
  auto v = out.mutable_unchecked<1>();
  for (std::size_t i = 0; i < labels.size(); ++i) v(i) = static_cast<std::int64_t>(labels[i]);
  return out;
}

nlohmann::json report_json(const ExperimentReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json j = {{"grid_value", row.grid_value}, {"grid_index", row.grid_index}, {"method", row.method},
                        {"replication", row.replication}, {"seed", row.seed}, {"ok", row.ok},
                        {"error", row.error}, {"stage_ms", row.stage_ms}};
    auto put = [&](const char* key, const std::optional<double>& v) { j[key] = v ? nlohmann::json(*v) : nlohmann::json(); };
    put("deviation", row.deviation);
    put("l1", row.l1);
    put("b_err", row.b_err);
    put("f1", row.f1);
    put("nmi", row.nmi);
    put("ari", row.ari);
    rows.push_back(std::move(j));
  }
  return {{"axis", r.axis}, {"rows", rows}, {"aggregate", r.aggregate()}};
}

std::string run_json(const std::string& config, bool write) {
  const RunConfig cfg = run_config_from_json(nlohmann::json::parse(config));
  if (cfg.kind == RunKind::timing) {
    const TimingReport t = run_timing(cfg);
    if (write) write_timing_report(cfg, t);
    return t.to_json().dump();
  }
  const ExperimentReport r = cfg.kind == RunKind::real ? run_real(cfg) : run_synthetic(cfg);
  if (write) write_report(cfg, r);
  return report_json(r).dump();
}

}  // namespace

PYBIND11_MODULE(_rsclust, m) {
  m.doc() = "Randomized spectral clustering on block-model graphs";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), (std::string(e.kind()) + ": " + e.what()).c_str());
    } catch (const nlohmann::json::exception& e) {
      PyErr_SetString(error.ptr(), (std::string("parameter: ") + e.what()).c_str());
    }
  });

  m.def("preset_names", &preset_names);
  m.def("preset_json", [](const std::string& name) { return to_json(preset(name)).dump(); }, py::arg("name"));
  m.def("run_json", &run_json, py::arg("config"), py::arg("write") = false,
        "Runs a config given as JSON text; returns the report as JSON text.");

  m.def("eq47_json", [](std::size_t n, std::size_t K, double alpha, double lambda) {
    return to_json(make_eq47(n, K, alpha, lambda)).dump();
  }, py::arg("n"), py::arg("K") = 3, py::arg("alpha") = 0.2, py::arg("lambda_") = 0.5);
  m.def("benchmark_json", [](const std::string& name, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    return to_json(make_benchmark_model({name, n}, rng)).dump();
  }, py::arg("name"), py::arg("n"), py::arg("seed") = 0);
  m.def("sample_graph", [](const std::string& params, std::uint64_t seed) {
    const SbmParams p = sbm_params_from_json(nlohmann::json::parse(params));
    Rng rng(seed);
    return graph_arrays(sample_graph(p, rng));
  }, py::arg("params"), py::arg("seed"), "Returns (n, edges, weights).");

  m.def("cluster", [](std::size_t n, const IndexArray& edges, std::optional<WeightArray> weights, std::size_t K,
                      const std::string& method, std::size_t target_rank, const std::string& variant,
                      std::size_t oversampling, std::size_t power, const std::string& distribution, double p,
                      std::size_t restarts, std::uint64_t seed) {
    const SparseSymGraph g = to_graph(n, edges, weights);
    ClusterOptions o;
    o.K = K;
    o.target_rank = target_rank;
    o.variant = parse_variant(variant);
    o.kmeans.restarts = restarts;
    o.seed = seed;
    if (method != "plain" && method != "rp" && method != "rs") throw ParameterError("unknown method '" + method + "'");
    std::vector<std::size_t> labels;
    {
      py::gil_scoped_release release;
      if (method == "plain") {
        labels = spectral_cluster(as_operator(g), o).clustering.labels;
      } else if (method == "rp") {
        SketchConfig sk;
        sk.oversampling = oversampling;
        sk.power = power;
        sk.distribution = parse_test_distribution(distribution);
        sk.seed = derive_seed(seed, {hash_tag("sketch")});
        labels = rp_spectral_cluster(as_operator(g), o, sk).clustering.labels;
      } else {
        SamplingConfig sc;
        sc.p = p;
        sc.seed = derive_seed(seed, {hash_tag("sampling")});
        labels = rs_spectral_cluster(g, o, sc).clustering.labels;
      }
    }
    return label_array(labels);
  }, py::arg("n"), py::arg("edges"), py::arg("weights") = py::none(), py::arg("K"), py::arg("method") = "plain",
     py::arg("target_rank") = 0, py::arg("variant") = "plain", py::arg("oversampling") = 10, py::arg("power") = 2,
     py::arg("distribution") = "gaussian", py::arg("p") = 0.7, py::arg("restarts") = 50, py::arg("seed") = 0);

  m.def("misclassification_l1", [](const IndexArray& est, const IndexArray& truth, std::size_t K) {
    const L1Result r = misclassification_l1(to_labels(est), to_labels(truth), K);
    return py::make_tuple(r.value, r.permutation);
  }, py::arg("est"), py::arg("truth"), py::arg("K"), "Returns (L1, permutation).");
  m.def("pair_metrics", [](const IndexArray& est, const IndexArray& ref) {
    const PairMetrics pm = pair_metrics(to_labels(est), to_labels(ref));
    py::dict d;
    d["f1"] = pm.f1;
    d["nmi"] = pm.nmi;
    d["ari"] = pm.ari;
    return d;
  }, py::arg("est"), py::arg("ref"));
}
