#include "fairgb/cnm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fairgb {

Matrix AugmentedGraph::build_features() const {
  const Matrix& x = base->features;
  Matrix out(x.rows + num_injected(), x.cols);
  std::copy(x.data.begin(), x.data.end(), out.data.begin());
  for (int m = 0; m < num_injected(); ++m) {
    const auto& mix = injected[m].x_mix;
    if (static_cast<int>(mix.size()) != x.cols) {
      throw std::invalid_argument("augmented graph: x_mix width mismatch");
    }
    std::copy(mix.begin(), mix.end(), out.row(x.rows + m).begin());
  }
  return out;
}

std::vector<std::vector<int>> AugmentedGraph::neighbor_lists() const {
  std::vector<std::vector<int>> lists;
  lists.reserve(injected.size());
  for (const auto& ego : injected) lists.push_back(ego.neighbors);
  return lists;
}

MixKind choose_kind(double eta, Rng& rng) {
  if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("choose_kind: eta outside [0,1]");
  return rng.uniform() >= eta ? MixKind::inter_domain : MixKind::inter_class;
}

int sample_counterexample(const GroupTable& groups, const Graph& graph, int i, MixKind kind,
                          Rng& rng) {
  if (kind == MixKind::self_fallback) {
    throw std::invalid_argument("sample_counterexample: self_fallback has no candidate pool");
  }
  const GroupKey key{graph.labels[i], graph.sensitive[i]};
  std::vector<const std::vector<int>*> pools;
  long total = 0;
  for (const auto& [k, nodes] : groups.groups) {
    const bool qualifies = kind == MixKind::inter_domain ? (k.y == key.y && k.s != key.s)
                                                         : (k.y != key.y && k.s == key.s);
    if (qualifies && !nodes.empty()) {
      pools.push_back(&nodes);
      total += static_cast<long>(nodes.size());
    }
  }
  if (total == 0) {
    throw std::runtime_error("no counterexample for group (" + std::to_string(key.y) + "," +
                             std::to_string(key.s) + ")");
  }
  long pick = static_cast<long>(rng.uniform_int(static_cast<uint64_t>(total)));
  for (const auto* pool : pools) {
    if (pick < static_cast<long>(pool->size())) return (*pool)[pick];
    pick -= static_cast<long>(pool->size());
  }
  throw std::logic_error("sample_counterexample: pick out of range");
}

std::vector<double> mix_features(std::span<const double> x_i, std::span<const double> x_j,
                                 double lambda) {
  if (x_i.size() != x_j.size()) {
    throw std::invalid_argument("mix_features: dimension mismatch");
  }
  std::vector<double> out(x_i.size());
  for (size_t k = 0; k < out.size(); ++k) {
    out[k] = lambda * x_i[k] + (1.0 - lambda) * x_j[k];
  }
  return out;
}

std::vector<double> soft_label(int y_i, int y_j, double lambda, int num_classes) {
  if (y_i < 0 || y_i >= num_classes || y_j < 0 || y_j >= num_classes) {
    throw std::invalid_argument("soft_label: label outside class range");
  }
  std::vector<double> out(num_classes, 0.0);
  out[y_i] += lambda;
  out[y_j] += 1.0 - lambda;
  return out;
}

NeighborDistribution mix_neighbor_distribution(const NeighborDistribution& p_i,
                                               const NeighborDistribution& p_j, double lambda) {
  if (p_i.support.empty() && p_j.support.empty()) {
    throw std::runtime_error("mix_neighbor_distribution: isolated pair");
  }
  if (p_i.support.empty()) return p_j;
  if (p_j.support.empty()) return p_i;

  std::map<int, double> mass;
  for (size_t k = 0; k < p_i.support.size(); ++k) {
    mass[p_i.support[k]] += lambda * p_i.probs[k];
  }
  for (size_t k = 0; k < p_j.support.size(); ++k) {
    mass[p_j.support[k]] += (1.0 - lambda) * p_j.probs[k];
  }
  NeighborDistribution out;
  for (auto& [v, p] : mass) {
    out.support.push_back(v);
    out.probs.push_back(p);
  }
  return out;
}

std::vector<int> sample_ego_neighbors(const NeighborDistribution& p_mix,
                                      const DegreeDistribution& deg_dist, Rng& rng) {
  if (p_mix.support.empty()) {
    throw std::invalid_argument("sample_ego_neighbors: empty distribution");
  }
  if (deg_dist.degrees.empty()) {
    throw std::invalid_argument("sample_ego_neighbors: empty degree distribution");
  }
  long target = deg_dist.degrees[rng.uniform_int(deg_dist.degrees.size())];
  target = std::clamp<long>(target, 1, static_cast<long>(p_mix.support.size()));

  std::vector<int> remaining(p_mix.support.begin(), p_mix.support.end());
  std::vector<double> weight(p_mix.probs.begin(), p_mix.probs.end());
  std::vector<int> chosen;
  chosen.reserve(target);
  for (long t = 0; t < target; ++t) {
    double total = 0.0;
    for (double w : weight) total += w;
    size_t idx = remaining.size() - 1;
    if (total > 0.0) {
      const double u = rng.uniform() * total;
      double acc = 0.0;
      for (size_t k = 0; k < weight.size(); ++k) {
        acc += weight[k];
        if (u < acc) {
          idx = k;
          break;
        }
      }
    } else {
      // Zero-mass leftovers (boundary lambda): fall back to a uniform pick.
      idx = rng.uniform_int(remaining.size());
    }
    chosen.push_back(remaining[idx]);
    remaining.erase(remaining.begin() + idx);
    weight.erase(weight.begin() + idx);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

namespace {

void check_pair(const MixPair& pair, const Graph& g) {
  switch (pair.kind) {
    case MixKind::inter_domain:
      if (g.labels[pair.i] != g.labels[pair.j] || g.sensitive[pair.i] == g.sensitive[pair.j]) {
        throw std::logic_error("mix pair violates inter_domain constraint");
      }
      break;
    case MixKind::inter_class:
      if (g.labels[pair.i] == g.labels[pair.j] || g.sensitive[pair.i] != g.sensitive[pair.j]) {
        throw std::logic_error("mix pair violates inter_class constraint");
      }
      break;
    case MixKind::self_fallback:
      if (pair.i != pair.j || pair.lambda != 1.0) {
        throw std::logic_error("self fallback must be an identity mix");
      }
      break;
  }
}

}  // namespace

AugmentedGraph build_augmented_graph(const Graph& graph, const GroupTable& groups,
                                     const CnmConfig& cfg, uint64_t run_seed, long epoch) {
  if (cfg.beta_alpha <= 0.0) {
    throw std::invalid_argument("cnm config: beta_alpha must be positive");
  }
  const DegreeDistribution deg_dist = degree_distribution(graph);
  AugmentedGraph aug;
  aug.base = &graph;
  aug.pairs.reserve(graph.train_mask.size());
  aug.injected.reserve(graph.train_mask.size());

  const uint64_t cnm_seed = Rng::mix(run_seed, kRngCnm);
  for (int v : graph.train_mask) {
    Rng rng(Rng::mix(cnm_seed, static_cast<uint64_t>(epoch), static_cast<uint64_t>(v)));

    MixPair pair;
    pair.i = v;
    MixKind kind = choose_kind(cfg.eta, rng);
    try {
      pair.j = sample_counterexample(groups, graph, v, kind, rng);
      pair.kind = kind;
    } catch (const std::runtime_error&) {
      MixKind other =
          kind == MixKind::inter_domain ? MixKind::inter_class : MixKind::inter_domain;
      try {
        pair.j = sample_counterexample(groups, graph, v, other, rng);
        pair.kind = other;
      } catch (const std::runtime_error&) {
        pair.j = v;
        pair.kind = MixKind::self_fallback;
      }
    }
    pair.lambda = pair.kind == MixKind::self_fallback ? 1.0 : rng.beta(cfg.beta_alpha, cfg.beta_alpha);
    check_pair(pair, graph);

    MixedEgoNetwork ego;
    ego.y_i = graph.labels[pair.i];
    ego.y_j = graph.labels[pair.j];
    ego.lambda = pair.lambda;
    ego.group_i = {graph.labels[pair.i], graph.sensitive[pair.i]};
    ego.group_j = {graph.labels[pair.j], graph.sensitive[pair.j]};
    ego.x_mix = mix_features(graph.features.row(pair.i), graph.features.row(pair.j), pair.lambda);

    const auto p_i = neighbor_distribution(graph, pair.i);
    const auto p_j = neighbor_distribution(graph, pair.j);
    if (p_i.support.empty() && p_j.support.empty()) {
      // Both endpoints isolated: wire the mixed node to its sources.
      ego.neighbors = pair.i == pair.j ? std::vector<int>{pair.i}
                                       : std::vector<int>{std::min(pair.i, pair.j),
                                                          std::max(pair.i, pair.j)};
    } else {
      NeighborDistribution p_mix = mix_neighbor_distribution(p_i, p_j, pair.lambda);
      if (cfg.degree_mode == DegreeMode::interpolated) {
        // Round the interpolated endpoint degrees instead of a global draw.
        const double d = pair.lambda * graph.adj.degree(pair.i) +
                         (1.0 - pair.lambda) * graph.adj.degree(pair.j);
        DegreeDistribution point;
        point.degrees.push_back(static_cast<int>(std::lround(d)));
        ego.neighbors = sample_ego_neighbors(p_mix, point, rng);
      } else {
        ego.neighbors = sample_ego_neighbors(p_mix, deg_dist, rng);
      }
    }

    aug.pairs.push_back(pair);
    aug.injected.push_back(std::move(ego));
  }
  return aug;
}

std::map<GroupKey, long> pair_occurrences(const AugmentedGraph& aug) {
  std::map<GroupKey, long> counts;
  for (const auto& ego : aug.injected) {
    ++counts[ego.group_i];
    ++counts[ego.group_j];
  }
  return counts;
}

IndependenceReport verify_independence(const std::map<GroupKey, long>& counts) {
  long total = 0;
  std::map<int, long> by_s;
  std::map<int, long> by_y;
  for (const auto& [key, c] : counts) {
    if (c < 0) throw std::invalid_argument("verify_independence: negative count");
    total += c;
    by_s[key.s] += c;
    by_y[key.y] += c;
  }
  if (total == 0) throw std::invalid_argument("verify_independence: no occurrences");

  IndependenceReport report;
  for (auto& [s, c] : by_s) {
    if (c == 0) report.excluded_sensitive.push_back(s);
  }
  for (const auto& [y, y_total] : by_y) {
    const double p_marg = static_cast<double>(y_total) / static_cast<double>(total);
    for (const auto& [s, bucket] : by_s) {
      if (bucket == 0) continue;
      auto it = counts.find({y, s});
      const long c = it == counts.end() ? 0 : it->second;
      const double p_cond = static_cast<double>(c) / static_cast<double>(bucket);
      report.max_deviation = std::max(report.max_deviation, std::abs(p_cond - p_marg));
    }
  }
  return report;
}

}  // namespace fairgb
