#include "dqgnn/graphdata.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>

#include "dqgnn/errors.hpp"

namespace dqgnn {

namespace fs = std::filesystem;

std::vector<std::vector<int>> Graph::adjacency() const {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(node_count));
  for (const auto& [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

Graph make_graph(int node_count, const std::vector<std::pair<int, int>>& edges,
                 std::vector<FeatureVector> node_features, int label) {
  if (node_count < 1) throw UsageError("graph needs at least one node");
  if (static_cast<int>(node_features.size()) != node_count) {
    throw UsageError("graph has " + std::to_string(node_count) + " nodes but " +
                     std::to_string(node_features.size()) + " feature vectors");
  }
  for (const auto& f : node_features) {
    if (f.size() != node_features.front().size()) throw UsageError("node feature dimensions differ");
  }
  if (label != 0 && label != 1) throw UsageError("graph label must be 0 or 1");
  std::set<std::pair<int, int>> unique;
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= node_count || b >= node_count) {
      throw UsageError("edge (" + std::to_string(a) + ", " + std::to_string(b) + ") out of range");
    }
    if (a == b) throw UsageError("self-loop on node " + std::to_string(a));
    unique.insert(std::minmax(a, b));
  }
  Graph g;
  g.node_count = node_count;
  g.edges.assign(unique.begin(), unique.end());
  g.node_features = std::move(node_features);
  g.label = label;
  return g;
}

namespace {

struct LineReader {
  fs::path path;
  std::ifstream in;
  std::string line;
  std::size_t line_no = 0;

  explicit LineReader(fs::path p) : path(std::move(p)), in(path) {
    if (!in) {
      throw ParseError(ParseError::Kind::kMissingFile, path.string(), 0, "cannot open dataset file");
    }
  }

  // Next non-blank line; false at EOF.
  bool next() {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  }

  [[noreturn]] void fail(ParseError::Kind kind, const std::string& detail) const {
    throw ParseError(kind, path.string(), line_no, detail);
  }

  // Parses comma/whitespace separated integers on the current line.
  std::vector<long long> integers() const {
    std::vector<long long> out;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end) {
      while (p < end && (*p == ' ' || *p == '\t' || *p == ',' || *p == '\r')) ++p;
      if (p == end) break;
      long long v = 0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc() || (next < end && *next != ' ' && *next != '\t' && *next != ',' && *next != '\r')) {
        fail(ParseError::Kind::kBadToken, "non-integer token in \"" + line + "\"");
      }
      out.push_back(v);
      p = next;
    }
    return out;
  }

  long long single_integer() const {
    auto v = integers();
    if (v.size() != 1) fail(ParseError::Kind::kBadToken, "expected one integer, got \"" + line + "\"");
    return v.front();
  }
};

}  // namespace

Dataset parse_tudataset(const fs::path& dataset_dir, const std::string& dataset_name) {
  const auto file = [&](const char* suffix) { return dataset_dir / (dataset_name + "_" + suffix + ".txt"); };

  // Open everything first so a missing file is reported before any content error.
  LineReader indicator(file("graph_indicator"));
  LineReader graph_labels(file("graph_labels"));
  LineReader node_labels(file("node_labels"));
  LineReader adjacency(file("A"));

  std::vector<long long> node_graph;  // 1-based graph id per node
  while (indicator.next()) {
    const long long id = indicator.single_integer();
    if (id < 1) indicator.fail(ParseError::Kind::kBadToken, "graph id must be >= 1");
    if (!node_graph.empty() && id < node_graph.back()) {
      indicator.fail(ParseError::Kind::kInconsistent, "graph ids must be non-decreasing");
    }
    node_graph.push_back(id);
  }
  if (node_graph.empty()) indicator.fail(ParseError::Kind::kInconsistent, "no nodes");

  std::vector<long long> raw_graph_label;
  while (graph_labels.next()) raw_graph_label.push_back(graph_labels.single_integer());
  const auto graph_count = static_cast<long long>(raw_graph_label.size());
  if (node_graph.back() > graph_count) {
    throw ParseError(ParseError::Kind::kDanglingReference, indicator.path.string(), node_graph.size(),
                     "graph id " + std::to_string(node_graph.back()) + " has no label (only " +
                         std::to_string(graph_count) + " graphs)");
  }

  std::set<long long> distinct_graph_labels(raw_graph_label.begin(), raw_graph_label.end());
  if (distinct_graph_labels.size() > 2) {
    throw ParseError(ParseError::Kind::kTooManyLabels, graph_labels.path.string(), 0,
                     std::to_string(distinct_graph_labels.size()) + " distinct graph labels, expected at most 2");
  }

  std::vector<long long> raw_node_label;
  while (node_labels.next()) raw_node_label.push_back(node_labels.single_integer());
  if (raw_node_label.size() != node_graph.size()) {
    throw ParseError(ParseError::Kind::kInconsistent, node_labels.path.string(), 0,
                     std::to_string(raw_node_label.size()) + " node labels for " +
                         std::to_string(node_graph.size()) + " nodes");
  }

  Dataset ds;
  ds.name = dataset_name;
  ds.raw_labels.assign(distinct_graph_labels.begin(), distinct_graph_labels.end());
  std::set<long long> distinct_node_labels(raw_node_label.begin(), raw_node_label.end());
  ds.node_label_values.assign(distinct_node_labels.begin(), distinct_node_labels.end());
  std::map<long long, std::size_t> one_hot_index;
  for (std::size_t i = 0; i < ds.node_label_values.size(); ++i) one_hot_index[ds.node_label_values[i]] = i;

  // Per-graph node ranges; node k (0-based global) is local index k - first[g].
  std::vector<long long> first(static_cast<std::size_t>(graph_count), -1);
  std::vector<int> count(static_cast<std::size_t>(graph_count), 0);
  for (std::size_t k = 0; k < node_graph.size(); ++k) {
    const auto g = static_cast<std::size_t>(node_graph[k] - 1);
    if (first[g] < 0) first[g] = static_cast<long long>(k);
    ++count[g];
  }
  for (long long g = 0; g < graph_count; ++g) {
    if (count[g] == 0) {
      throw ParseError(ParseError::Kind::kInconsistent, indicator.path.string(), 0,
                       "graph " + std::to_string(g + 1) + " has no nodes");
    }
  }

  std::vector<std::vector<std::pair<int, int>>> edges(static_cast<std::size_t>(graph_count));
  const auto node_total = static_cast<long long>(node_graph.size());
  while (adjacency.next()) {
    const auto v = adjacency.integers();
    if (v.size() != 2) adjacency.fail(ParseError::Kind::kBadToken, "expected an edge pair \"i, j\"");
    for (long long id : v) {
      if (id < 1 || id > node_total) {
        adjacency.fail(ParseError::Kind::kDanglingReference,
                       "node " + std::to_string(id) + " does not exist (" + std::to_string(node_total) + " nodes)");
      }
    }
    const long long a = v[0] - 1;
    const long long b = v[1] - 1;
    if (node_graph[a] != node_graph[b]) {
      adjacency.fail(ParseError::Kind::kInconsistent, "edge joins nodes of different graphs");
    }
    if (a == b) continue;  // self-loops carry no neighbourhood information
    const auto g = static_cast<std::size_t>(node_graph[a] - 1);
    edges[g].emplace_back(static_cast<int>(a - first[g]), static_cast<int>(b - first[g]));
  }

  ds.graphs.reserve(static_cast<std::size_t>(graph_count));
  for (long long g = 0; g < graph_count; ++g) {
    std::vector<FeatureVector> features(count[g], FeatureVector(ds.feature_dim(), 0.0));
    for (int local = 0; local < count[g]; ++local) {
      features[local][one_hot_index.at(raw_node_label[first[g] + local])] = 1.0;
    }
    const int label = raw_graph_label[g] == ds.raw_labels.front() ? 0 : 1;
    ds.graphs.push_back(make_graph(count[g], edges[g], std::move(features), label));
  }
  return ds;
}

std::vector<Subgraph> decompose_graph(const Graph& g) {
  const auto adj = g.adjacency();
  std::vector<Subgraph> out;
  out.reserve(static_cast<std::size_t>(g.node_count));
  for (int v = 0; v < g.node_count; ++v) {
    Subgraph s;
    s.center = v;
    s.neighbors = adj[v];
    s.center_feature = g.node_features[v];
    for (int u : s.neighbors) s.neighbor_features.push_back(g.node_features[u]);
    out.push_back(std::move(s));
  }
  return out;
}

NeighborChunks partition_neighbors(const Subgraph& s, int capacity) {
  if (capacity < 1) throw UsageError("chunk capacity must be >= 1, got " + std::to_string(capacity));
  NeighborChunks out;
  out.chunk_capacity = capacity;
  for (std::size_t i = 0; i < s.neighbors.size(); i += static_cast<std::size_t>(capacity)) {
    const auto end = std::min(s.neighbors.size(), i + static_cast<std::size_t>(capacity));
    out.chunks.emplace_back(s.neighbors.begin() + static_cast<std::ptrdiff_t>(i),
                            s.neighbors.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

}  // namespace dqgnn
