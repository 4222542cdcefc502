#include "fairgb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace fairgb {

namespace {

void check_lengths(size_t a, size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": length mismatch");
}

// Positive rate within one sensitive group; nullopt when the group is empty.
std::optional<double> group_rate(std::span<const int> y_pred, std::span<const int> sensitive,
                                 int group) {
  long hits = 0;
  long total = 0;
  for (size_t i = 0; i < y_pred.size(); ++i) {
    if (sensitive[i] != group) continue;
    ++total;
    if (y_pred[i] == 1) ++hits;
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(hits) / static_cast<double>(total);
}

// Rate of pred=1 among nodes of a group with the given true label.
std::optional<double> conditional_rate(std::span<const int> y_true, std::span<const int> y_pred,
                                       std::span<const int> sensitive, int group, int label) {
  long hits = 0;
  long total = 0;
  for (size_t i = 0; i < y_true.size(); ++i) {
    if (sensitive[i] != group || y_true[i] != label) continue;
    ++total;
    if (y_pred[i] == 1) ++hits;
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

std::optional<double> delta_sp(std::span<const int> y_pred, std::span<const int> sensitive) {
  check_lengths(y_pred.size(), sensitive.size(), "delta_sp");
  auto r0 = group_rate(y_pred, sensitive, 0);
  auto r1 = group_rate(y_pred, sensitive, 1);
  if (!r0 || !r1) return std::nullopt;
  return std::abs(*r0 - *r1);
}

std::optional<double> delta_eo(std::span<const int> y_true, std::span<const int> y_pred,
                               std::span<const int> sensitive) {
  check_lengths(y_true.size(), y_pred.size(), "delta_eo");
  check_lengths(y_true.size(), sensitive.size(), "delta_eo");
  auto tpr0 = conditional_rate(y_true, y_pred, sensitive, 0, 1);
  auto tpr1 = conditional_rate(y_true, y_pred, sensitive, 1, 1);
  if (!tpr0 || !tpr1) return std::nullopt;
  return std::abs(*tpr0 - *tpr1);
}

std::optional<double> delta_eodds(std::span<const int> y_true, std::span<const int> y_pred,
                                  std::span<const int> sensitive) {
  check_lengths(y_true.size(), y_pred.size(), "delta_eodds");
  check_lengths(y_true.size(), sensitive.size(), "delta_eodds");
  auto tpr0 = conditional_rate(y_true, y_pred, sensitive, 0, 1);
  auto tpr1 = conditional_rate(y_true, y_pred, sensitive, 1, 1);
  auto fpr0 = conditional_rate(y_true, y_pred, sensitive, 0, 0);
  auto fpr1 = conditional_rate(y_true, y_pred, sensitive, 1, 0);
  if (!tpr0 || !tpr1 || !fpr0 || !fpr1) return std::nullopt;
  return std::max(std::abs(*tpr0 - *tpr1), std::abs(*fpr0 - *fpr1));
}

std::optional<double> auc(std::span<const int> y_true, std::span<const double> score) {
  check_lengths(y_true.size(), score.size(), "auc");
  const size_t n = y_true.size();
  long n_pos = 0;
  for (int y : y_true) n_pos += (y == 1);
  const long n_neg = static_cast<long>(n) - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return score[a] < score[b]; });

  // Average ranks over tie blocks, then sum ranks of positives.
  double rank_sum_pos = 0.0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && score[order[j + 1]] == score[order[i]]) ++j;
    // 1-based ranks i+1 .. j+1 share the average (i + j + 2) / 2.
    const double avg_rank = 0.5 * static_cast<double>(i + j + 2);
    for (size_t k = i; k <= j; ++k) {
      if (y_true[order[k]] == 1) rank_sum_pos += avg_rank;
    }
    i = j + 1;
  }
  const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) *
                                      static_cast<double>(n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

std::optional<double> f1_score(std::span<const int> y_true, std::span<const int> y_pred) {
  check_lengths(y_true.size(), y_pred.size(), "f1_score");
  long tp = 0;
  long fp = 0;
  long fn = 0;
  for (size_t i = 0; i < y_true.size(); ++i) {
    const bool t = y_true[i] == 1;
    const bool p = y_pred[i] == 1;
    tp += (t && p);
    fp += (!t && p);
    fn += (t && !p);
  }
  if (tp + fp == 0 || tp + fn == 0) return std::nullopt;
  const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

std::optional<double> accuracy(std::span<const int> y_true, std::span<const int> y_pred) {
  check_lengths(y_true.size(), y_pred.size(), "accuracy");
  if (y_true.empty()) return std::nullopt;
  long hits = 0;
  for (size_t i = 0; i < y_true.size(); ++i) hits += (y_true[i] == y_pred[i]);
  return static_cast<double>(hits) / static_cast<double>(y_true.size());
}

Evaluation evaluate_nodes(const Graph& graph, std::span<const int> nodes,
                          std::span<const double> prob_positive) {
  if (static_cast<int>(prob_positive.size()) != graph.num_nodes()) {
    throw std::invalid_argument("evaluate_nodes: score length != node count");
  }
  std::vector<int> y_true;
  std::vector<int> y_pred;
  std::vector<int> sens;
  std::vector<double> score;
  y_true.reserve(nodes.size());
  for (int v : nodes) {
    if (graph.labels[v] == kUndefined) {
      throw std::invalid_argument("evaluate_nodes: node " + std::to_string(v) + " has no label");
    }
    y_true.push_back(graph.labels[v]);
    y_pred.push_back(prob_positive[v] > 0.5 ? 1 : 0);
    sens.push_back(graph.sensitive[v]);
    score.push_back(prob_positive[v]);
  }
  Evaluation ev;
  ev.accuracy = accuracy(y_true, y_pred);
  ev.f1 = f1_score(y_true, y_pred);
  ev.auc = auc(y_true, score);
  ev.delta_sp = delta_sp(y_pred, sens);
  ev.delta_eo = delta_eo(y_true, y_pred, sens);
  ev.delta_eodds = delta_eodds(y_true, y_pred, sens);
  return ev;
}

}  // namespace fairgb
