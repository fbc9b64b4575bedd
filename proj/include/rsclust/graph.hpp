#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rsclust/dense.hpp"

namespace rsclust {

struct Edge {
  std::size_t i;
  std::size_t j;
  double w;
};

// Weighted undirected graph in compressed row form. Both (i, j) and (j, i)
// are stored; column indices within a row are strictly increasing. There are
// no diagonal entries and every weight is strictly positive. Immutable once
// built.
class SparseSymGraph {
 public:
  SparseSymGraph() : offsets_(1, 0) {}

  // Validates and builds. Each undirected pair may appear once, in either
  // orientation. Throws ParameterError on self loops, duplicates,
  // non-positive weights, or out-of-range indices.
  static SparseSymGraph from_edges(std::size_t n, std::vector<Edge> edges);

  std::size_t num_nodes() const noexcept { return n_; }
  std::size_t num_edges() const noexcept { return cols_.size() / 2; }
  std::size_t nnz() const noexcept { return cols_.size(); }

  std::span<const std::uint32_t> neighbors(std::size_t i) const {
    return {cols_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  std::span<const double> weights(std::size_t i) const {
    return {vals_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  std::size_t degree(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }

  // 0 when the pair is not stored.
  double weight(std::size_t i, std::size_t j) const;

  // Upper-triangle edges (i < j) in row-major order.
  std::vector<Edge> edges() const;

  Matrix densify() const;

  friend bool operator==(const SparseSymGraph&, const SparseSymGraph&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> cols_;
  std::vector<double> vals_;
};

std::vector<double> matvec(const SparseSymGraph& g, std::span<const double> x);
std::vector<double> matvec(const DenseSymMatrix& m, std::span<const double> x);
// Block product Y = G X for an n x l block.
Matrix matvec(const SparseSymGraph& g, const Matrix& block);

struct EdgeListOptions {
  // Field separator; whitespace when unset.
  std::optional<char> delimiter;
  // Subtract one from every id before use (file ids start at 1).
  bool one_indexed = false;
  std::string comment_prefix = "#";
  // Map the distinct ids seen to 0..n-1 in increasing order. When false the
  // node count is max id + 1 and gaps become isolated nodes.
  bool compact_ids = true;
};

struct EdgeListResult {
  SparseSymGraph graph;
  // original_ids[k] is the id (as written in the file) of node k.
  std::vector<std::int64_t> original_ids;
  std::size_t duplicates_dropped = 0;
  std::size_t self_loops_dropped = 0;
  std::size_t isolated_nodes = 0;
  std::size_t lines_read = 0;
};

EdgeListResult load_edge_list(std::istream& in, const EdgeListOptions& options = {});
EdgeListResult load_edge_list(const std::filesystem::path& path, const EdgeListOptions& options = {});

}  // namespace rsclust
