#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rsclust/clustering.hpp"
#include "rsclust/error.hpp"
#include "rsclust/evaluate.hpp"
#include "rsclust/rand_eig.hpp"
#include "rsclust/sample_eig.hpp"
#include "rsclust/sbm.hpp"

namespace rsclust {

// Raised when more than half the replications at a grid point fail.
class RunAborted : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "aborted"; }
};

enum class RunKind { synthetic, real, timing };

struct ModelSpec {
  BenchmarkSpec benchmark;                // used unless `explicit_params` is set
  std::optional<double> alpha_scale;      // alpha = alpha_scale / sqrt(n) when set
  std::optional<SbmParams> explicit_params;
};

struct DatasetSpec {
  std::string name;
  std::filesystem::path edges;
  std::optional<std::filesystem::path> labels;
  bool one_indexed = false;
  std::optional<char> delimiter;
  std::string comment_prefix = "#";
};

struct SweepSpec {
  std::string axis = "none";  // none | n | alpha | K | p | r | q | distribution
  nlohmann::json values = nlohmann::json::array();
};

struct RunConfig {
  RunKind kind = RunKind::synthetic;
  std::string preset;  // informational
  ModelSpec model;
  DatasetSpec dataset;
  std::vector<std::string> methods = {"plain", "rp", "rs"};
  std::size_t K = 0;            // 0: taken from the model
  std::size_t target_rank = 0;  // 0: K
  Variant variant = Variant::plain;
  SketchConfig sketch;
  SamplingConfig sampling;
  KMeansOptions kmeans;
  SubspaceOptions eigensolver;
  SweepSpec sweep;
  std::size_t replications = 20;
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // replication workers; 0: hardware concurrency
  bool deviation = true;
  double deviation_tol = 1e-7;
  std::filesystem::path output_dir = "rsclust-out";

  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& doc);

std::vector<std::string> preset_names();
RunConfig preset(const std::string& name);

// Axes whose values only change a method hyperparameter. Grid points along
// them reuse the same graphs and method seeds.
bool is_method_axis(const std::string& axis);

// Runs the sweep and returns the report; nothing is written.
ExperimentReport run_synthetic(const RunConfig& cfg);
ExperimentReport run_real(const RunConfig& cfg);

struct TimingRow {
  std::string method;
  std::string stage;
  std::vector<double> samples_ms;
  double median_ms() const;
};

struct TimingReport {
  std::vector<TimingRow> rows;
  nlohmann::json machine;
  void write_csv(std::ostream& out) const;
  nlohmann::json to_json() const;
};

TimingReport run_timing(const RunConfig& cfg);

// Writes rows.csv, timing.csv and aggregate.json (plus the resolved
// config.json) into cfg.output_dir.
void write_report(const RunConfig& cfg, const ExperimentReport& report);
void write_timing_report(const RunConfig& cfg, const TimingReport& report);

// One clustering of a loaded graph with the seeds a real run would use for
// the given replication.
Clustering cluster_dataset(const RunConfig& cfg, const SparseSymGraph& graph, const std::string& method,
                           std::size_t replication = 0);

// Ground truth for real data: either "id label" lines keyed by original node
// id or one label per line in node order. Labels are compacted to 0..m-1.
std::vector<std::size_t> load_labels(const std::filesystem::path& path, std::span<const std::int64_t> original_ids);

}  // namespace rsclust
