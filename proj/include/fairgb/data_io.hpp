#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairgb/graph.hpp"

namespace fairgb {

// Explicit node lists win when set; otherwise a per-class stratified random
// split with floor(fraction * class size) train and valid nodes, rest test.
struct SplitPolicy {
  std::optional<std::vector<int>> train_nodes;
  std::optional<std::vector<int>> valid_nodes;
  std::optional<std::vector<int>> test_nodes;
  double train_fraction = 0.5;
  double valid_fraction = 0.25;
  uint64_t seed = 0;
};

struct SplitMasks {
  std::vector<int> train;
  std::vector<int> valid;
  std::vector<int> test;
};

// CSV dataset description. nodes_file needs a header with a node_id column,
// the named label and sensitive columns, and numeric feature columns.
// edges_file lists each undirected edge once as src,dst (node_id values,
// header row required). *_idx files hold one node_id per line and are used
// when the paths are non-empty; otherwise the fraction policy applies to all
// labeled nodes.
struct DatasetSpec {
  std::string name;
  std::string nodes_file;
  std::string edges_file;
  std::string label_column = "label";
  std::string sensitive_column = "sensitive";
  bool include_sensitive_in_features = true;
  std::string train_idx;
  std::string valid_idx;
  std::string test_idx;
  double train_fraction = 0.5;
  double valid_fraction = 0.25;
  uint64_t split_seed = 0;
};

// Planted-structure generator: four blocks keyed by (label, sensitive) with
// homophilous edges. Features are unit Gaussian noise plus a label-driven
// shift on the first half of the dimensions and a sensitive-driven shift on
// the second half. All nodes come out labeled and train-masked; callers
// split and standardize afterwards.
struct SyntheticSpec {
  // Block sizes in (y,s) order (0,0), (0,1), (1,0), (1,1).
  std::array<int, 4> group_counts{0, 0, 0, 0};
  double intra_p = 0.0;  // edge probability inside a block
  double inter_p = 0.0;  // edge probability across blocks
  int feature_dim = 2;
  double class_signal = 1.0;
  double sens_signal = 1.0;
  uint64_t seed = 0;
};

struct DatasetStats {
  int num_nodes = 0;
  long num_undirected_edges = 0;
  int num_features = 0;
};

Graph load_dataset(const DatasetSpec& spec);

// Column-wise z-score with population std; constant columns map to zero.
Matrix standardize_features(const Matrix& x);

Graph generate_synthetic(const SyntheticSpec& spec);

SplitMasks split_nodes(const Graph& graph, const SplitPolicy& policy);

DatasetStats dataset_stats(const Graph& graph);

}  // namespace fairgb
