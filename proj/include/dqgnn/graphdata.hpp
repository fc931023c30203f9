#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace dqgnn {

using FeatureVector = std::vector<double>;

/// Undirected, unweighted graph with per-node features and a binary label.
struct Graph {
  int node_count = 0;
  /// Unordered pairs stored with first < second, sorted, no duplicates.
  std::vector<std::pair<int, int>> edges;
  std::vector<FeatureVector> node_features;
  int label = 0;

  std::size_t feature_dim() const { return node_features.empty() ? 0 : node_features.front().size(); }

  /// Sorted adjacency lists derived from `edges`.
  std::vector<std::vector<int>> adjacency() const;

  friend bool operator==(const Graph&, const Graph&) = default;
};

/// Builds a graph from an arbitrary edge list, dropping duplicates and rejecting
/// self-loops, out-of-range endpoints and ragged features (UsageError).
Graph make_graph(int node_count, const std::vector<std::pair<int, int>>& edges,
                 std::vector<FeatureVector> node_features, int label);

struct Subgraph {
  int center = 0;
  std::vector<int> neighbors;  // ascending node index
  FeatureVector center_feature;
  std::vector<FeatureVector> neighbor_features;
};

struct NeighborChunks {
  std::vector<std::vector<int>> chunks;
  int chunk_capacity = 1;
};

struct Dataset {
  std::string name;
  std::vector<Graph> graphs;
  /// Raw graph labels in the order they were mapped to 0 and 1.
  std::vector<long long> raw_labels;
  /// Raw node labels, position = one-hot index.
  std::vector<long long> node_label_values;

  std::size_t feature_dim() const { return node_label_values.size(); }
};

/// Reads `<dir>/<name>_{A,graph_indicator,graph_labels,node_labels}.txt`.
/// Node labels are one-hot encoded over the sorted distinct values; graph labels
/// map to {0, 1} with the smaller raw label at 0. Throws ParseError.
Dataset parse_tudataset(const std::filesystem::path& dataset_dir, const std::string& dataset_name);

/// One subgraph per node: the node and its neighbours.
std::vector<Subgraph> decompose_graph(const Graph& g);

/// Greedy consecutive split of the neighbour list into chunks of at most `capacity`.
NeighborChunks partition_neighbors(const Subgraph& s, int capacity);

}  // namespace dqgnn
