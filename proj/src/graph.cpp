#include "fairgb/graph.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

namespace fairgb {

Csr build_csr(int num_nodes, std::span<const std::pair<int, int>> undirected_edges) {
  if (num_nodes < 0) throw std::invalid_argument("build_csr: negative node count");
  std::set<std::pair<int, int>> seen;
  for (auto [a, b] : undirected_edges) {
    if (a < 0 || a >= num_nodes || b < 0 || b >= num_nodes) {
      throw std::invalid_argument("build_csr: edge endpoint out of range: (" +
                                  std::to_string(a) + "," + std::to_string(b) + ")");
    }
    if (a == b) {
      throw std::invalid_argument("build_csr: self-loop on node " + std::to_string(a));
    }
    auto key = std::minmax(a, b);
    if (!seen.insert({key.first, key.second}).second) {
      throw std::invalid_argument("build_csr: duplicate edge (" + std::to_string(key.first) +
                                  "," + std::to_string(key.second) + ")");
    }
  }

  Csr adj;
  adj.n = num_nodes;
  std::vector<int> deg(num_nodes, 0);
  for (auto [a, b] : seen) {
    ++deg[a];
    ++deg[b];
  }
  adj.offsets.assign(num_nodes + 1, 0);
  for (int v = 0; v < num_nodes; ++v) adj.offsets[v + 1] = adj.offsets[v] + deg[v];
  adj.cols.resize(adj.offsets.back());
  std::vector<int> cursor(adj.offsets.begin(), adj.offsets.end() - 1);
  for (auto [a, b] : seen) {
    adj.cols[cursor[a]++] = b;
    adj.cols[cursor[b]++] = a;
  }
  for (int v = 0; v < num_nodes; ++v) {
    std::sort(adj.cols.begin() + adj.offsets[v], adj.cols.begin() + adj.offsets[v + 1]);
  }
  return adj;
}

std::vector<std::pair<int, int>> edge_list(const Csr& adj) {
  std::vector<std::pair<int, int>> out;
  out.reserve(adj.cols.size() / 2);
  for (int v = 0; v < adj.n; ++v) {
    for (int u : adj.neighbors(v)) {
      if (v < u) out.emplace_back(v, u);
    }
  }
  return out;
}

namespace {

void check_sorted_mask(const std::vector<int>& mask, int n, const std::string& name) {
  for (size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] < 0 || mask[i] >= n) {
      throw std::invalid_argument("graph: " + name + " contains out-of-range node " +
                                  std::to_string(mask[i]));
    }
    if (i > 0 && mask[i] <= mask[i - 1]) {
      throw std::invalid_argument("graph: " + name + " must be sorted and duplicate-free");
    }
  }
}

}  // namespace

void Graph::validate() const {
  const int n = adj.n;
  if (features.rows != n) {
    throw std::invalid_argument("graph: feature rows (" + std::to_string(features.rows) +
                                ") != node count (" + std::to_string(n) + ")");
  }
  if (static_cast<int>(labels.size()) != n || static_cast<int>(sensitive.size()) != n) {
    throw std::invalid_argument("graph: labels/sensitive length != node count");
  }
  for (int v = 0; v < n; ++v) {
    if (labels[v] != kUndefined && (labels[v] < 0 || labels[v] >= num_classes)) {
      throw std::invalid_argument("graph: label " + std::to_string(labels[v]) + " on node " +
                                  std::to_string(v) + " outside 0.." +
                                  std::to_string(num_classes - 1));
    }
    if (sensitive[v] != kUndefined && (sensitive[v] < 0 || sensitive[v] >= num_groups)) {
      throw std::invalid_argument("graph: sensitive value " + std::to_string(sensitive[v]) +
                                  " on node " + std::to_string(v) + " outside 0.." +
                                  std::to_string(num_groups - 1));
    }
  }
  check_sorted_mask(train_mask, n, "train_mask");
  check_sorted_mask(valid_mask, n, "valid_mask");
  check_sorted_mask(test_mask, n, "test_mask");
  std::vector<int> seen(n, 0);
  for (int v : train_mask) ++seen[v];
  for (int v : valid_mask) ++seen[v];
  for (int v : test_mask) ++seen[v];
  for (int v = 0; v < n; ++v) {
    if (seen[v] > 1) {
      throw std::invalid_argument("graph: node " + std::to_string(v) +
                                  " appears in multiple splits");
    }
  }
  features.check_finite("graph features");
}

GroupTable build_group_table(const Graph& graph) {
  if (graph.train_mask.empty()) {
    throw std::invalid_argument("group table: train set is empty");
  }
  GroupTable table;
  for (int v : graph.train_mask) {
    if (graph.labels[v] == kUndefined) {
      throw std::invalid_argument("group table: train node " + std::to_string(v) +
                                  " has no label");
    }
    if (graph.sensitive[v] == kUndefined) {
      throw std::invalid_argument("group table: train node " + std::to_string(v) +
                                  " has no sensitive value");
    }
    table.groups[{graph.labels[v], graph.sensitive[v]}].push_back(v);
  }
  table.num_train = static_cast<int>(graph.train_mask.size());
  return table;
}

NeighborDistribution neighbor_distribution(const Graph& graph, int v) {
  NeighborDistribution dist;
  auto nbrs = graph.adj.neighbors(v);
  dist.support.assign(nbrs.begin(), nbrs.end());
  if (!dist.support.empty()) {
    dist.probs.assign(dist.support.size(), 1.0 / static_cast<double>(dist.support.size()));
  }
  return dist;
}

DegreeDistribution degree_distribution(const Graph& graph) {
  DegreeDistribution dist;
  dist.degrees.resize(graph.num_nodes());
  for (int v = 0; v < graph.num_nodes(); ++v) dist.degrees[v] = graph.adj.degree(v);
  return dist;
}

}  // namespace fairgb
