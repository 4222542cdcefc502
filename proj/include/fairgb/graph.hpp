#pragma once

#include <compare>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "fairgb/matrix.hpp"

namespace fairgb {

// Sentinel for nodes without a label / sensitive value.
inline constexpr int kUndefined = -1;

// Compressed sparse adjacency: sorted neighbor lists with row offsets.
// Undirected edges are stored in both directions; self-loops are never stored
// (encoders that need them add them during normalization).
struct Csr {
  int n = 0;
  std::vector<int> offsets;  // size n+1
  std::vector<int> cols;

  std::span<const int> neighbors(int v) const {
    return {cols.data() + offsets[v], static_cast<size_t>(offsets[v + 1] - offsets[v])};
  }
  int degree(int v) const { return offsets[v + 1] - offsets[v]; }
  long num_directed_edges() const { return static_cast<long>(cols.size()); }
};

// Builds a symmetric Csr from an undirected edge list (each pair once).
// Throws on out-of-range endpoints, self-loops, and duplicate pairs.
Csr build_csr(int num_nodes, std::span<const std::pair<int, int>> undirected_edges);

// Extracts the sorted undirected edge list (i < j) back out of a Csr.
std::vector<std::pair<int, int>> edge_list(const Csr& adj);

// Immutable attributed graph: adjacency, features, labels, sensitive values,
// and disjoint train/valid/test masks (sorted node-index lists).
struct Graph {
  Csr adj;
  Matrix features;             // N x D
  std::vector<int> labels;     // kUndefined where unlabeled
  std::vector<int> sensitive;  // kUndefined where undefined
  std::vector<int> train_mask;
  std::vector<int> valid_mask;
  std::vector<int> test_mask;
  int num_classes = 0;  // C: labels take values in 0..C-1
  int num_groups = 0;   // B: sensitive values take 0..B-1

  int num_nodes() const { return adj.n; }
  long num_undirected_edges() const { return adj.num_directed_edges() / 2; }

  // Checks all structural invariants; throws with a description on violation.
  void validate() const;
};

struct GroupKey {
  int y = 0;
  int s = 0;
  auto operator<=>(const GroupKey&) const = default;
};

// Partition of the train nodes into demographic groups keyed by
// (label, sensitive value).
struct GroupTable {
  std::map<GroupKey, std::vector<int>> groups;
  int num_train = 0;

  int count(GroupKey k) const {
    auto it = groups.find(k);
    return it == groups.end() ? 0 : static_cast<int>(it->second.size());
  }
};

// Throws a schema error when the train set is empty or a train node lacks a
// label or sensitive value.
GroupTable build_group_table(const Graph& graph);

// Uniform distribution over the neighbors of a node; empty for isolated nodes.
struct NeighborDistribution {
  std::vector<int> support;   // unique node indices
  std::vector<double> probs;  // same length, sums to 1 when non-empty
};

NeighborDistribution neighbor_distribution(const Graph& graph, int v);

// Empirical multiset of all N node degrees of the original graph.
struct DegreeDistribution {
  std::vector<int> degrees;
};

DegreeDistribution degree_distribution(const Graph& graph);

}  // namespace fairgb
