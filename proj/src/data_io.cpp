#include "fairgb/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "fairgb/rng.hpp"

namespace fairgb {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

std::string trimmed(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trimmed(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && trimmed(lines.back()).empty()) lines.pop_back();
  return lines;
}

double parse_double(const std::string& cell, const std::string& file, size_t line_no,
                    const std::string& column) {
  try {
    size_t pos = 0;
    double v = std::stod(cell, &pos);
    if (pos != cell.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    fail(file + " line " + std::to_string(line_no) + " column '" + column +
         "': non-numeric cell '" + cell + "'");
  }
}

long parse_id(const std::string& cell, const std::string& file, size_t line_no,
              const std::string& column) {
  double v = parse_double(cell, file, line_no, column);
  double r = std::round(v);
  if (std::abs(v - r) > 1e-9) {
    fail(file + " line " + std::to_string(line_no) + " column '" + column +
         "': expected an integer, got '" + cell + "'");
  }
  return static_cast<long>(r);
}

// Reads one node_id per line and maps to graph indices.
std::vector<int> read_index_file(const std::string& path, const std::map<long, int>& id_to_index) {
  std::vector<int> nodes;
  auto lines = read_lines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    std::string cell = trimmed(lines[i]);
    if (cell.empty()) continue;
    long id = parse_id(cell, path, i + 1, "node_id");
    auto it = id_to_index.find(id);
    if (it == id_to_index.end()) {
      fail(path + " line " + std::to_string(i + 1) + ": unknown node_id " + std::to_string(id));
    }
    nodes.push_back(it->second);
  }
  std::sort(nodes.begin(), nodes.end());
  return nodes;
}

int label_from_cell(double v, const std::string& file, size_t line_no,
                    const std::string& column) {
  double r = std::round(v);
  if (std::abs(v - r) > 1e-9 || r < 0) {
    fail(file + " line " + std::to_string(line_no) + " column '" + column +
         "': expected a non-negative integer, got " + std::to_string(v));
  }
  return static_cast<int>(r);
}

}  // namespace

Graph load_dataset(const DatasetSpec& spec) {
  auto lines = read_lines(spec.nodes_file);
  if (lines.empty()) fail(spec.nodes_file + ": empty file");
  auto header = split_csv_line(lines[0]);

  auto column_of = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) fail(spec.nodes_file + ": missing column '" + name + "'");
    return static_cast<int>(it - header.begin());
  };
  const int id_col = column_of("node_id");
  const int label_col = column_of(spec.label_column);
  const int sens_col = column_of(spec.sensitive_column);
  if (label_col == id_col || sens_col == id_col || label_col == sens_col) {
    fail(spec.nodes_file + ": node_id, label, and sensitive columns must be distinct");
  }

  std::vector<int> feature_cols;
  for (int c = 0; c < static_cast<int>(header.size()); ++c) {
    if (c == id_col || c == label_col) continue;
    if (c == sens_col && !spec.include_sensitive_in_features) continue;
    feature_cols.push_back(c);
  }

  const int n = static_cast<int>(lines.size()) - 1;
  if (n <= 0) fail(spec.nodes_file + ": no data rows");

  std::vector<long> ids(n);
  std::map<long, int> id_row;  // node_id -> data row
  Matrix raw(n, static_cast<int>(feature_cols.size()));
  std::vector<int> labels(n);
  std::vector<int> sensitive(n);
  for (int r = 0; r < n; ++r) {
    const size_t line_no = static_cast<size_t>(r) + 2;
    auto cells = split_csv_line(lines[r + 1]);
    if (cells.size() != header.size()) {
      fail(spec.nodes_file + " line " + std::to_string(line_no) + ": expected " +
           std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()));
    }
    ids[r] = parse_id(cells[id_col], spec.nodes_file, line_no, "node_id");
    if (!id_row.emplace(ids[r], r).second) {
      fail(spec.nodes_file + " line " + std::to_string(line_no) + ": duplicate node_id " +
           std::to_string(ids[r]));
    }
    labels[r] = label_from_cell(
        parse_double(cells[label_col], spec.nodes_file, line_no, spec.label_column),
        spec.nodes_file, line_no, spec.label_column);
    sensitive[r] = label_from_cell(
        parse_double(cells[sens_col], spec.nodes_file, line_no, spec.sensitive_column),
        spec.nodes_file, line_no, spec.sensitive_column);
    for (size_t f = 0; f < feature_cols.size(); ++f) {
      raw.at(r, static_cast<int>(f)) =
          parse_double(cells[feature_cols[f]], spec.nodes_file, line_no, header[feature_cols[f]]);
    }
  }

  // node_id values map to graph indices in sorted id order.
  std::map<long, int> id_to_index;
  for (auto& [id, row] : id_row) id_to_index.emplace(id, static_cast<int>(id_to_index.size()));

  Graph g;
  g.features = Matrix(n, raw.cols);
  g.labels.resize(n);
  g.sensitive.resize(n);
  for (auto& [id, row] : id_row) {
    const int v = id_to_index.at(id);
    g.labels[v] = labels[row];
    g.sensitive[v] = sensitive[row];
    for (int f = 0; f < raw.cols; ++f) g.features.at(v, f) = raw.at(row, f);
  }
  g.num_classes = *std::max_element(g.labels.begin(), g.labels.end()) + 1;
  g.num_groups = *std::max_element(g.sensitive.begin(), g.sensitive.end()) + 1;

  auto edge_lines = read_lines(spec.edges_file);
  if (edge_lines.empty()) fail(spec.edges_file + ": empty file");
  std::vector<std::pair<int, int>> edges;
  std::set<std::pair<int, int>> seen;
  for (size_t i = 1; i < edge_lines.size(); ++i) {
    if (trimmed(edge_lines[i]).empty()) continue;
    auto cells = split_csv_line(edge_lines[i]);
    if (cells.size() != 2) {
      fail(spec.edges_file + " line " + std::to_string(i + 1) + ": expected 2 cells, got " +
           std::to_string(cells.size()));
    }
    long src_id = parse_id(cells[0], spec.edges_file, i + 1, "src");
    long dst_id = parse_id(cells[1], spec.edges_file, i + 1, "dst");
    auto src_it = id_to_index.find(src_id);
    auto dst_it = id_to_index.find(dst_id);
    if (src_it == id_to_index.end() || dst_it == id_to_index.end()) {
      fail(spec.edges_file + " line " + std::to_string(i + 1) + ": edge endpoint " +
           std::to_string(src_it == id_to_index.end() ? src_id : dst_id) +
           " is not a node_id");
    }
    int a = src_it->second;
    int b = dst_it->second;
    if (a == b) {
      fail(spec.edges_file + " line " + std::to_string(i + 1) + ": self-loop on node_id " +
           std::to_string(src_id));
    }
    auto key = std::minmax(a, b);
    if (!seen.insert({key.first, key.second}).second) {
      fail(spec.edges_file + " line " + std::to_string(i + 1) + ": duplicate edge " +
           std::to_string(src_id) + "," + std::to_string(dst_id));
    }
    edges.emplace_back(a, b);
  }
  g.adj = build_csr(n, edges);
  g.features = standardize_features(g.features);

  SplitPolicy policy;
  policy.train_fraction = spec.train_fraction;
  policy.valid_fraction = spec.valid_fraction;
  policy.seed = spec.split_seed;
  if (!spec.train_idx.empty()) policy.train_nodes = read_index_file(spec.train_idx, id_to_index);
  if (!spec.valid_idx.empty()) policy.valid_nodes = read_index_file(spec.valid_idx, id_to_index);
  if (!spec.test_idx.empty()) policy.test_nodes = read_index_file(spec.test_idx, id_to_index);
  auto masks = split_nodes(g, policy);
  g.train_mask = std::move(masks.train);
  g.valid_mask = std::move(masks.valid);
  g.test_mask = std::move(masks.test);
  g.validate();
  return g;
}

Matrix standardize_features(const Matrix& x) {
  x.check_finite("standardize_features input");
  Matrix out(x.rows, x.cols);
  if (x.rows == 0) return out;
  for (int c = 0; c < x.cols; ++c) {
    double mean = 0.0;
    for (int r = 0; r < x.rows; ++r) mean += x.at(r, c);
    mean /= x.rows;
    double var = 0.0;
    for (int r = 0; r < x.rows; ++r) {
      double d = x.at(r, c) - mean;
      var += d * d;
    }
    var /= x.rows;
    const double sd = std::sqrt(var);
    for (int r = 0; r < x.rows; ++r) {
      out.at(r, c) = sd > 0.0 ? (x.at(r, c) - mean) / sd : 0.0;
    }
  }
  return out;
}

Graph generate_synthetic(const SyntheticSpec& spec) {
  for (int c : spec.group_counts) {
    if (c < 0) fail("synthetic spec: negative group count");
  }
  if (spec.intra_p < 0 || spec.intra_p > 1 || spec.inter_p < 0 || spec.inter_p > 1) {
    fail("synthetic spec: edge probabilities must lie in [0,1]");
  }
  if (spec.feature_dim < 2) fail("synthetic spec: feature_dim must be at least 2");
  const int n = spec.group_counts[0] + spec.group_counts[1] + spec.group_counts[2] +
                spec.group_counts[3];
  if (n == 0) fail("synthetic spec: no nodes");

  Graph g;
  g.labels.reserve(n);
  g.sensitive.reserve(n);
  for (int block = 0; block < 4; ++block) {
    const int y = block / 2;
    const int s = block % 2;
    for (int k = 0; k < spec.group_counts[block]; ++k) {
      g.labels.push_back(y);
      g.sensitive.push_back(s);
    }
  }
  g.num_classes = 2;
  g.num_groups = 2;

  Rng rng(spec.seed);
  const int half = spec.feature_dim / 2;
  g.features = Matrix(n, spec.feature_dim);
  for (int v = 0; v < n; ++v) {
    const double y_shift = spec.class_signal * (2 * g.labels[v] - 1);
    const double s_shift = spec.sens_signal * (2 * g.sensitive[v] - 1);
    for (int f = 0; f < spec.feature_dim; ++f) {
      g.features.at(v, f) = rng.normal() + (f < half ? y_shift : s_shift);
    }
  }

  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const bool same_block =
          g.labels[i] == g.labels[j] && g.sensitive[i] == g.sensitive[j];
      const double p = same_block ? spec.intra_p : spec.inter_p;
      if (rng.uniform() < p) edges.emplace_back(i, j);
    }
  }
  g.adj = build_csr(n, edges);

  g.train_mask.resize(n);
  for (int v = 0; v < n; ++v) g.train_mask[v] = v;
  g.validate();
  return g;
}

SplitMasks split_nodes(const Graph& graph, const SplitPolicy& policy) {
  SplitMasks masks;
  if (policy.train_nodes || policy.valid_nodes || policy.test_nodes) {
    if (policy.train_nodes) masks.train = *policy.train_nodes;
    if (policy.valid_nodes) masks.valid = *policy.valid_nodes;
    if (policy.test_nodes) masks.test = *policy.test_nodes;
    for (auto* m : {&masks.train, &masks.valid, &masks.test}) {
      std::sort(m->begin(), m->end());
    }
    Graph probe = graph;
    probe.train_mask = masks.train;
    probe.valid_mask = masks.valid;
    probe.test_mask = masks.test;
    probe.validate();  // catches overlap and out-of-range indices
    return masks;
  }

  if (policy.train_fraction < 0 || policy.valid_fraction < 0 ||
      policy.train_fraction + policy.valid_fraction > 1.0) {
    fail("split policy: fractions must be non-negative and sum to at most 1");
  }
  std::map<int, std::vector<int>> by_class;
  for (int v = 0; v < graph.num_nodes(); ++v) {
    if (graph.labels[v] != kUndefined) by_class[graph.labels[v]].push_back(v);
  }
  if (by_class.empty()) fail("split policy: no labeled nodes to split");

  Rng rng(Rng::mix(policy.seed, kRngSplit));
  for (auto& [y, nodes] : by_class) {
    // Fisher-Yates keyed to the split substream.
    for (size_t i = nodes.size(); i > 1; --i) {
      size_t j = rng.uniform_int(i);
      std::swap(nodes[i - 1], nodes[j]);
    }
    const size_t n_train = static_cast<size_t>(policy.train_fraction * nodes.size());
    const size_t n_valid = static_cast<size_t>(policy.valid_fraction * nodes.size());
    for (size_t i = 0; i < nodes.size(); ++i) {
      if (i < n_train) {
        masks.train.push_back(nodes[i]);
      } else if (i < n_train + n_valid) {
        masks.valid.push_back(nodes[i]);
      } else {
        masks.test.push_back(nodes[i]);
      }
    }
  }
  for (auto* m : {&masks.train, &masks.valid, &masks.test}) {
    std::sort(m->begin(), m->end());
  }
  return masks;
}

DatasetStats dataset_stats(const Graph& graph) {
  DatasetStats stats;
  stats.num_nodes = graph.num_nodes();
  stats.num_undirected_edges = graph.num_undirected_edges();
  stats.num_features = graph.features.cols;
  return stats;
}

}  // namespace fairgb
