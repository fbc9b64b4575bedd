// Command line front end: synthetic sweeps, real datasets, one-off
// clusterings, timing runs and preset inspection. Errors are reported as JSON on stdout with a nonzero
// exit code.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rsclust/clustering.hpp"
#include "rsclust/experiment.hpp"
#include "rsclust/graph.hpp"

using nlohmann::json;

namespace {

struct Flags {
  std::string config_path;
  std::string preset;

  std::optional<std::string> model;
  std::optional<std::size_t> n;
  std::optional<std::size_t> model_K;
  std::optional<double> alpha;
  std::optional<double> lambda;
  std::optional<double> alpha_scale;
  std::optional<std::string> sbm_path;

  std::optional<std::string> edges;
  std::optional<std::string> labels;
  std::optional<std::string> dataset_name;
  bool one_indexed = false;
  std::optional<std::string> delimiter;

  std::optional<std::string> methods;
  std::optional<std::size_t> K;
  std::optional<std::size_t> target_rank;
  std::optional<std::string> variant;
  std::optional<std::size_t> oversampling;
  std::optional<std::size_t> power;
  std::optional<std::string> distribution;
  std::optional<std::string> sampling_mode;
  std::optional<double> p;
  std::optional<double> p_min;
  std::optional<double> target_mean;
  std::optional<std::size_t> restarts;
  std::optional<std::string> sweep_axis;
  std::optional<std::string> sweep_values;
  std::optional<std::size_t> replications;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  bool no_deviation = false;
  std::optional<std::string> output;
};

int emit_error(std::string_view kind, std::string_view message, int code) {
  json err = {{"error", {{"kind", kind}, {"message", message}}}};
  std::cout << err.dump() << std::endl;
  return code;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw rsclust::Error("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw rsclust::ParseError("'" + path + "': " + e.what(), 0);
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

json grid_values(const std::string& list) {
  json values = json::array();
  for (const auto& item : split_list(list)) {
    json v = json::parse(item, nullptr, false);
    values.push_back(v.is_discarded() ? json(item) : v);
  }
  return values;
}

template <class T>
void put(json& doc, const char* key, const std::optional<T>& v) {
  if (v) doc[key] = *v;
}

rsclust::RunConfig resolve(const Flags& f, rsclust::RunKind kind) {
  json doc = json::object();
  if (!f.config_path.empty()) doc = read_json_file(f.config_path);
  if (!f.preset.empty()) doc["preset"] = f.preset;
  doc["kind"] = kind == rsclust::RunKind::synthetic ? "synthetic" : kind == rsclust::RunKind::real ? "real" : "timing";

  json model = doc.value("model", json::object());
  if (f.sbm_path) model = {{"sbm", read_json_file(*f.sbm_path)}};
  put(model, "name", f.model);
  put(model, "n", f.n);
  put(model, "K", f.model_K);
  put(model, "alpha", f.alpha);
  put(model, "lambda", f.lambda);
  put(model, "alpha_scale", f.alpha_scale);
  if (!model.empty()) doc["model"] = model;

  json ds = doc.value("dataset", json::object());
  put(ds, "edges", f.edges);
  put(ds, "labels", f.labels);
  put(ds, "name", f.dataset_name);
  put(ds, "delimiter", f.delimiter);
  if (f.one_indexed) ds["one_indexed"] = true;
  if (!ds.empty()) doc["dataset"] = ds;

  if (f.methods) doc["methods"] = split_list(*f.methods);
  put(doc, "K", f.K);
  put(doc, "target_rank", f.target_rank);
  put(doc, "variant", f.variant);

  json sketch = doc.value("sketch", json::object());
  put(sketch, "oversampling", f.oversampling);
  put(sketch, "power", f.power);
  put(sketch, "distribution", f.distribution);
  if (!sketch.empty()) doc["sketch"] = sketch;

  json sampling = doc.value("sampling", json::object());
  put(sampling, "mode", f.sampling_mode);
  put(sampling, "p", f.p);
  put(sampling, "p_min", f.p_min);
  put(sampling, "target_mean", f.target_mean);
  if (!sampling.empty()) doc["sampling"] = sampling;

  if (f.restarts) doc["kmeans"]["restarts"] = *f.restarts;

  if (f.sweep_axis || f.sweep_values) {
    json sweep = doc.value("sweep", json::object());
    put(sweep, "axis", f.sweep_axis);
    if (f.sweep_values) sweep["values"] = grid_values(*f.sweep_values);
    doc["sweep"] = sweep;
  }
  put(doc, "replications", f.replications);
  put(doc, "seed", f.seed);
  put(doc, "threads", f.threads);
  if (f.no_deviation) doc["deviation"] = false;
  put(doc, "output_dir", f.output);
  return rsclust::run_config_from_json(doc);
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config_path, "JSON run config");
  sub->add_option("--preset", f.preset, "named preset");
  sub->add_option("--methods", f.methods, "comma list of plain,rp,rs");
  sub->add_option("--K", f.K, "number of communities (real data only; synthetic runs use --model-K)");
  sub->add_option("--target-rank", f.target_rank, "K'");
  sub->add_option("--variant", f.variant, "plain | spherical");
  sub->add_option("--oversampling,-r", f.oversampling);
  sub->add_option("--power,-q", f.power);
  sub->add_option("--distribution", f.distribution, "gaussian | uniform | rademacher");
  sub->add_option("--sampling-mode", f.sampling_mode, "uniform | row_norm");
  sub->add_option("--p,-p", f.p, "sampling probability");
  sub->add_option("--p-min", f.p_min);
  sub->add_option("--target-mean", f.target_mean);
  sub->add_option("--restarts", f.restarts, "k-means restarts");
  sub->add_option("--replications", f.replications);
  sub->add_option("--seed", f.seed);
  sub->add_option("--threads", f.threads, "replication workers, 0 for all cores");
  sub->add_option("--output,-o", f.output, "output directory");
}

void add_model(CLI::App* sub, Flags& f) {
  sub->add_option("--model", f.model, "eq47 | model1..model6");
  sub->add_option("--n", f.n);
  sub->add_option("--model-K", f.model_K, "communities of the eq47 model");
  sub->add_option("--alpha", f.alpha);
  sub->add_option("--lambda", f.lambda);
  sub->add_option("--alpha-scale", f.alpha_scale, "alpha = scale / sqrt(n)");
  sub->add_option("--sbm", f.sbm_path, "explicit SbmParams JSON file");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized spectral clustering experiments"};
  app.require_subcommand(1);
  Flags f;

  auto* synthetic = app.add_subcommand("synthetic", "SBM / DC-SBM sweep");
  add_common(synthetic, f);
  add_model(synthetic, f);
  synthetic->add_option("--sweep-axis", f.sweep_axis, "none | n | alpha | K | p | r | q | distribution");
  synthetic->add_option("--sweep-values", f.sweep_values, "comma separated grid");
  synthetic->add_flag("--no-deviation", f.no_deviation, "skip the spectral-norm deviation");

  auto* real = app.add_subcommand("real", "edge-list dataset");
  add_common(real, f);
  real->add_option("--edges", f.edges, "edge-list file");
  real->add_option("--labels", f.labels, "ground-truth label file");
  real->add_option("--name", f.dataset_name);
  real->add_option("--delimiter", f.delimiter);
  real->add_flag("--one-indexed", f.one_indexed);

  auto* cluster = app.add_subcommand("cluster", "cluster one edge list and write the labels");
  add_common(cluster, f);
  cluster->add_option("--edges", f.edges, "edge-list file")->required();
  cluster->add_option("--delimiter", f.delimiter);
  cluster->add_flag("--one-indexed", f.one_indexed);
  std::size_t replication = 0;
  cluster->add_option("--replication", replication, "seed stream, as in a real run");

  auto* timing = app.add_subcommand("timing", "per-stage wall time");
  add_common(timing, f);
  add_model(timing, f);

  auto* dump = app.add_subcommand("preset-dump", "print preset configs as JSON");
  std::string dump_name;
  dump->add_option("name", dump_name, "preset (all when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return emit_error("usage", e.what(), 2);
  }

  try {
    if (dump->parsed()) {
      json out;
      if (dump_name.empty()) {
        out = json::object();
        for (const auto& name : rsclust::preset_names()) out[name] = rsclust::to_json(rsclust::preset(name));
      } else {
        out = rsclust::to_json(rsclust::preset(dump_name));
      }
      std::cout << out.dump(2) << std::endl;
      return 0;
    }
    if (synthetic->parsed() || real->parsed()) {
      const auto kind = synthetic->parsed() ? rsclust::RunKind::synthetic : rsclust::RunKind::real;
      const rsclust::RunConfig cfg = resolve(f, kind);
      const rsclust::ExperimentReport report =
          kind == rsclust::RunKind::synthetic ? rsclust::run_synthetic(cfg) : rsclust::run_real(cfg);
      rsclust::write_report(cfg, report);
      std::size_t failed = 0;
      for (const auto& row : report.rows) failed += row.ok ? 0 : 1;
      std::cout << json{{"status", "ok"}, {"output_dir", cfg.output_dir.string()}, {"rows", report.rows.size()},
                        {"failed_rows", failed}}
                       .dump()
                << std::endl;
      return 0;
    }
    if (cluster->parsed()) {
      const rsclust::RunConfig cfg = resolve(f, rsclust::RunKind::real);
      rsclust::EdgeListOptions opts;
      opts.delimiter = cfg.dataset.delimiter;
      opts.one_indexed = cfg.dataset.one_indexed;
      const rsclust::EdgeListResult data = rsclust::load_edge_list(cfg.dataset.edges, opts);
      std::filesystem::create_directories(cfg.output_dir);
      json files = json::array();
      for (const auto& method : cfg.methods) {
        const rsclust::Clustering c = rsclust::cluster_dataset(cfg, data.graph, method, replication);
        const auto base = cfg.output_dir / method;
        std::ofstream js(base.string() + ".json");
        js << rsclust::clustering_to_json(c, data.original_ids).dump(2) << '\n';
        std::ofstream csv(base.string() + ".csv");
        rsclust::write_clustering_csv(csv, c, data.original_ids);
        if (!js || !csv) throw rsclust::Error("cannot write into '" + cfg.output_dir.string() + "'");
        files.push_back(base.string() + ".json");
        files.push_back(base.string() + ".csv");
      }
      std::cout << json{{"status", "ok"}, {"files", files}}.dump() << std::endl;
      return 0;
    }
    const rsclust::RunConfig cfg = resolve(f, rsclust::RunKind::timing);
    const rsclust::TimingReport report = rsclust::run_timing(cfg);
    rsclust::write_timing_report(cfg, report);
    std::cout << json{{"status", "ok"}, {"output_dir", cfg.output_dir.string()}}.dump() << std::endl;
    return 0;
  } catch (const rsclust::Error& e) {
    return emit_error(e.kind(), e.what(), 1);
  } catch (const std::exception& e) {
    return emit_error("internal", e.what(), 1);
  }
}
