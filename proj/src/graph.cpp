#include "rsclust/graph.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <string_view>

#include "rsclust/error.hpp"

namespace rsclust {
namespace {

bool edge_key_less(const Edge& a, const Edge& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; }

// Builds the compressed rows from canonical (i < j), sorted, duplicate-free
// edges. Sorted input gives sorted rows: row r receives its lower entries
// (c, r) before its upper entries (r, c), each in increasing order.
void build_rows(std::size_t n, const std::vector<Edge>& sorted, std::vector<std::size_t>& offsets,
                std::vector<std::uint32_t>& cols, std::vector<double>& vals) {
  offsets.assign(n + 1, 0);
  for (const Edge& e : sorted) {
    ++offsets[e.i + 1];
    ++offsets[e.j + 1];
  }
  for (std::size_t r = 0; r < n; ++r) offsets[r + 1] += offsets[r];
  cols.assign(offsets[n], 0);
  vals.assign(offsets[n], 0.0);
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  for (const Edge& e : sorted) {
    cols[cursor[e.i]] = static_cast<std::uint32_t>(e.j);
    vals[cursor[e.i]++] = e.w;
    cols[cursor[e.j]] = static_cast<std::uint32_t>(e.i);
    vals[cursor[e.j]++] = e.w;
  }
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, const std::optional<char>& delimiter) {
  std::vector<std::string_view> tokens;
  if (delimiter) {
    std::size_t start = 0;
    while (start <= line.size()) {
      const auto pos = line.find(*delimiter, start);
      const auto tok = trim(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start));
      if (!tok.empty()) tokens.push_back(tok);
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    return tokens;
  }
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

std::int64_t parse_id(std::string_view tok, std::size_t line_no) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError("expected integer node id, got '" + std::string(tok) + "'", line_no);
  return v;
}

}  // namespace

SparseSymGraph SparseSymGraph::from_edges(std::size_t n, std::vector<Edge> edges) {
  if (n > std::numeric_limits<std::uint32_t>::max()) throw ParameterError("graph too large for 32-bit indices");
  for (Edge& e : edges) {
    if (e.i >= n || e.j >= n) throw ParameterError("edge index out of range");
    if (e.i == e.j) throw ParameterError("self loop at node " + std::to_string(e.i));
    if (!(e.w > 0.0)) throw ParameterError("edge weights must be strictly positive");
    if (e.i > e.j) std::swap(e.i, e.j);
  }
  std::sort(edges.begin(), edges.end(), edge_key_less);
  for (std::size_t k = 1; k < edges.size(); ++k)
    if (edges[k].i == edges[k - 1].i && edges[k].j == edges[k - 1].j)
      throw ParameterError("duplicate edge (" + std::to_string(edges[k].i) + ", " + std::to_string(edges[k].j) + ")");
  SparseSymGraph g;
  g.n_ = n;
  build_rows(n, edges, g.offsets_, g.cols_, g.vals_);
  return g;
}

double SparseSymGraph::weight(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_) throw DimensionError("weight: index out of range");
  auto nb = neighbors(i);
  auto it = std::lower_bound(nb.begin(), nb.end(), static_cast<std::uint32_t>(j));
  if (it == nb.end() || *it != j) return 0.0;
  return weights(i)[static_cast<std::size_t>(it - nb.begin())];
}

std::vector<Edge> SparseSymGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (std::size_t i = 0; i < n_; ++i) {
    auto nb = neighbors(i);
    auto w = weights(i);
    for (std::size_t k = 0; k < nb.size(); ++k)
      if (nb[k] > i) out.push_back({i, nb[k], w[k]});
  }
  return out;
}

Matrix SparseSymGraph::densify() const {
  Matrix m(n_, n_);
  for (std::size_t i = 0; i < n_; ++i) {
    auto nb = neighbors(i);
    auto w = weights(i);
    for (std::size_t k = 0; k < nb.size(); ++k) m(i, nb[k]) = w[k];
  }
  return m;
}

std::vector<double> matvec(const SparseSymGraph& g, std::span<const double> x) {
  if (x.size() != g.num_nodes()) throw DimensionError("matvec: vector length does not match node count");
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    auto nb = g.neighbors(i);
    auto w = g.weights(i);
    double s = 0.0;
    for (std::size_t k = 0; k < nb.size(); ++k) s += w[k] * x[nb[k]];
    y[i] = s;
  }
  return y;
}

std::vector<double> matvec(const DenseSymMatrix& m, std::span<const double> x) {
  if (x.size() != m.dim()) throw DimensionError("matvec: vector length does not match dimension");
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t i = 0; i < m.dim(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m.dim(); ++j) s += m(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

Matrix matvec(const SparseSymGraph& g, const Matrix& block) {
  if (block.rows() != g.num_nodes()) throw DimensionError("matvec: block rows do not match node count");
  const std::size_t l = block.cols();
  Matrix out(g.num_nodes(), l);
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    auto nb = g.neighbors(i);
    auto w = g.weights(i);
    auto y = out.row(i);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      auto xr = block.row(nb[k]);
      const double wk = w[k];
      for (std::size_t c = 0; c < l; ++c) y[c] += wk * xr[c];
    }
  }
  return out;
}

EdgeListResult load_edge_list(std::istream& in, const EdgeListOptions& options) {
  struct RawPair {
    std::int64_t a, b;
  };
  std::vector<RawPair> pairs;
  std::vector<std::int64_t> ids;
  EdgeListResult result;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty()) continue;
    if (!options.comment_prefix.empty() && view.starts_with(options.comment_prefix)) continue;
    const auto tokens = split(view, options.delimiter);
    if (tokens.size() < 2) throw ParseError("expected two node ids", line_no);
    std::int64_t a = parse_id(tokens[0], line_no);
    std::int64_t b = parse_id(tokens[1], line_no);
    const std::int64_t shift = options.one_indexed ? 1 : 0;
    if (a - shift < 0 || b - shift < 0)
      throw ParseError(options.one_indexed ? "node id below 1 in one-indexed file" : "negative node id", line_no);
    pairs.push_back({a, b});
    ids.push_back(a);
    ids.push_back(b);
  }
  result.lines_read = line_no;

  const std::int64_t shift = options.one_indexed ? 1 : 0;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  std::size_t n = 0;
  if (options.compact_ids) {
    n = ids.size();
    result.original_ids = ids;
  } else {
    n = ids.empty() ? 0 : static_cast<std::size_t>(ids.back() - shift + 1);
    result.original_ids.resize(n);
    for (std::size_t k = 0; k < n; ++k) result.original_ids[k] = static_cast<std::int64_t>(k) + shift;
  }
  auto to_index = [&](std::int64_t id) -> std::size_t {
    if (!options.compact_ids) return static_cast<std::size_t>(id - shift);
    return static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
  };

  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (const RawPair& p : pairs) {
    std::size_t i = to_index(p.a), j = to_index(p.b);
    if (i == j) {
      ++result.self_loops_dropped;
      continue;
    }
    if (i > j) std::swap(i, j);
    edges.push_back({i, j, 1.0});
  }
  std::sort(edges.begin(), edges.end(), edge_key_less);
  const auto last = std::unique(edges.begin(), edges.end(),
                                [](const Edge& x, const Edge& y) { return x.i == y.i && x.j == y.j; });
  result.duplicates_dropped = static_cast<std::size_t>(edges.end() - last);
  edges.erase(last, edges.end());

  result.graph = SparseSymGraph::from_edges(n, std::move(edges));
  for (std::size_t i = 0; i < n; ++i)
    if (result.graph.degree(i) == 0) ++result.isolated_nodes;
  return result;
}

EdgeListResult load_edge_list(const std::filesystem::path& path, const EdgeListOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open edge list '" + path.string() + "'");
  return load_edge_list(in, options);
}

}  // namespace rsclust
