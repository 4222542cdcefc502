#include "fairgb/cal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fairgb {

namespace {

// Stable per-row softmax and CE pieces.
struct RowStats {
  std::vector<double> prob;
  double logsumexp = 0.0;

  double ce(int y) const { return logsumexp - raw[y]; }
  std::vector<double> raw;
};

RowStats row_stats(std::span<const double> logits) {
  RowStats st;
  st.raw.assign(logits.begin(), logits.end());
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double l : logits) sum += std::exp(l - m);
  st.logsumexp = m + std::log(sum);
  st.prob.resize(logits.size());
  for (size_t k = 0; k < logits.size(); ++k) st.prob[k] = std::exp(logits[k] - st.logsumexp);
  return st;
}

double weight_for(const GroupWeights& weights, GroupKey key) {
  auto it = weights.w.find(key);
  if (it == weights.w.end()) {
    throw std::invalid_argument("cal_loss: missing weight for group (" + std::to_string(key.y) +
                                "," + std::to_string(key.s) + ")");
  }
  return it->second;
}

}  // namespace

double contribution(std::span<const double> logits, int y) {
  if (y < 0 || y >= static_cast<int>(logits.size())) {
    throw std::invalid_argument("contribution: label outside logit range");
  }
  RowStats st = row_stats(logits);
  double r = 0.0;
  for (size_t k = 0; k < st.prob.size(); ++k) {
    r += std::abs(st.prob[k] - (static_cast<int>(k) == y ? 1.0 : 0.0));
  }
  return r;
}

std::vector<PairContribution> pair_contributions(const Matrix& logits,
                                                 std::span<const MixedEgoNetwork> pairs) {
  if (logits.rows != static_cast<int>(pairs.size())) {
    throw std::invalid_argument("pair_contributions: one logit row per pair required");
  }
  std::vector<PairContribution> sides(pairs.size());
  for (size_t m = 0; m < pairs.size(); ++m) {
    sides[m].group_i = pairs[m].group_i;
    sides[m].group_j = pairs[m].group_j;
    sides[m].r_i = contribution(logits.row(static_cast<int>(m)), pairs[m].y_i);
    sides[m].r_j = contribution(logits.row(static_cast<int>(m)), pairs[m].y_j);
  }
  return sides;
}

double ContributionLedger::total() const {
  double t = 0.0;
  for (const auto& [key, v] : r) t += v;
  return t;
}

ContributionLedger accumulate(std::span<const PairContribution> sides, long epoch) {
  ContributionLedger ledger;
  ledger.epoch = epoch;
  for (const auto& side : sides) {
    ledger.r[side.group_i] += side.r_i;
    ledger.r[side.group_j] += side.r_j;
  }
  return ledger;
}

GroupWeights group_weights(const ContributionLedger& ledger, double floor) {
  if (floor <= 0.0) throw std::invalid_argument("group_weights: floor must be positive");
  const double total = ledger.total();
  if (total <= 0.0) throw std::runtime_error("group_weights: no contributions");
  GroupWeights weights;
  double mean = 0.0;
  for (const auto& [key, r] : ledger.r) {
    if (r < 0.0) throw std::invalid_argument("group_weights: negative contribution");
    const double w = total / std::max(r, floor);
    weights.w[key] = w;
    mean += w;
  }
  mean /= static_cast<double>(weights.w.size());
  const double cap = 100.0 * mean;
  for (auto& [key, w] : weights.w) w = std::min(w, cap);
  return weights;
}

GroupWeights unit_weights(std::span<const MixedEgoNetwork> pairs) {
  GroupWeights weights;
  for (const auto& p : pairs) {
    weights.w[p.group_i] = 1.0;
    weights.w[p.group_j] = 1.0;
  }
  return weights;
}

CalResult cal_loss(const Matrix& logits, std::span<const MixedEgoNetwork> pairs,
                   const GroupWeights& weights) {
  if (logits.rows != static_cast<int>(pairs.size())) {
    throw std::invalid_argument("cal_loss: one logit row per pair required");
  }
  if (pairs.empty()) throw std::invalid_argument("cal_loss: empty pair list");
  const int c = logits.cols;
  CalResult result;
  result.grad = Matrix(logits.rows, c);
  const double scale = 1.0 / static_cast<double>(pairs.size());
  for (size_t m = 0; m < pairs.size(); ++m) {
    const auto& p = pairs[m];
    if (p.y_i < 0 || p.y_i >= c || p.y_j < 0 || p.y_j >= c) {
      throw std::invalid_argument("cal_loss: label outside logit range");
    }
    const double wi = weight_for(weights, p.group_i) * p.lambda;
    const double wj = weight_for(weights, p.group_j) * (1.0 - p.lambda);
    RowStats st = row_stats(logits.row(static_cast<int>(m)));
    result.loss += scale * (wi * st.ce(p.y_i) + wj * st.ce(p.y_j));
    auto grad = result.grad.row(static_cast<int>(m));
    for (int k = 0; k < c; ++k) {
      double g = (wi + wj) * st.prob[k];
      if (k == p.y_i) g -= wi;
      if (k == p.y_j) g -= wj;
      grad[k] = scale * g;
    }
  }
  return result;
}

CalResult mixup_loss(const Matrix& logits, std::span<const MixedEgoNetwork> pairs) {
  return cal_loss(logits, pairs, unit_weights(pairs));
}

CalResult weighted_ce(const Matrix& logits, std::span<const int> labels,
                      std::span<const double> row_weights) {
  if (logits.rows != static_cast<int>(labels.size()) ||
      logits.rows != static_cast<int>(row_weights.size())) {
    throw std::invalid_argument("weighted_ce: row count mismatch");
  }
  if (logits.rows == 0) throw std::invalid_argument("weighted_ce: empty batch");
  CalResult result;
  result.grad = Matrix(logits.rows, logits.cols);
  const double scale = 1.0 / static_cast<double>(logits.rows);
  for (int r = 0; r < logits.rows; ++r) {
    if (labels[r] < 0 || labels[r] >= logits.cols) {
      throw std::invalid_argument("weighted_ce: label outside logit range");
    }
    RowStats st = row_stats(logits.row(r));
    result.loss += scale * row_weights[r] * st.ce(labels[r]);
    for (int k = 0; k < logits.cols; ++k) {
      const double onehot = k == labels[r] ? 1.0 : 0.0;
      result.grad.at(r, k) = scale * row_weights[r] * (st.prob[k] - onehot);
    }
  }
  return result;
}

std::map<int, double> rw_weights(const GroupTable& groups) {
  std::map<int, double> weights;
  for (const auto& [key, nodes] : groups.groups) {
    const double w = static_cast<double>(groups.num_train) / static_cast<double>(nodes.size());
    for (int v : nodes) weights[v] = w;
  }
  return weights;
}

OversamplePlan oversample(const GroupTable& groups, Rng& rng) {
  size_t max_count = 0;
  for (const auto& [key, nodes] : groups.groups) max_count = std::max(max_count, nodes.size());
  OversamplePlan plan;
  for (const auto& [key, nodes] : groups.groups) {
    for (size_t k = nodes.size(); k < max_count; ++k) {
      plan.sources.push_back(nodes[rng.uniform_int(nodes.size())]);
    }
  }
  return plan;
}

AugmentedGraph materialize_oversample(const Graph& graph, const OversamplePlan& plan) {
  AugmentedGraph aug;
  aug.base = &graph;
  aug.pairs.reserve(plan.sources.size());
  aug.injected.reserve(plan.sources.size());
  for (int src : plan.sources) {
    MixPair pair;
    pair.i = pair.j = src;
    pair.kind = MixKind::self_fallback;
    pair.lambda = 1.0;
    aug.pairs.push_back(pair);

    MixedEgoNetwork ego;
    ego.y_i = ego.y_j = graph.labels[src];
    ego.lambda = 1.0;
    ego.group_i = ego.group_j = {graph.labels[src], graph.sensitive[src]};
    auto row = graph.features.row(src);
    ego.x_mix.assign(row.begin(), row.end());
    auto nbrs = graph.adj.neighbors(src);
    ego.neighbors.assign(nbrs.begin(), nbrs.end());
    aug.injected.push_back(std::move(ego));
  }
  return aug;
}

}  // namespace fairgb
