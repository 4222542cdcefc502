#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "fairgb/graph.hpp"
#include "fairgb/rng.hpp"

namespace fairgb {

// self_fallback marks the degenerate identity mix used when a train node has
// no counterexample of either kind; it is exempt from the pair constraints.
enum class MixKind { inter_domain, inter_class, self_fallback };

struct MixPair {
  int i = 0;
  int j = 0;
  MixKind kind = MixKind::self_fallback;
  double lambda = 1.0;
};

// One synthetic node: interpolated features, the (y_i, y_j, lambda) label
// pair kept un-collapsed so the loss can decompose exactly, and a sampled
// neighbor list into the base graph.
struct MixedEgoNetwork {
  std::vector<double> x_mix;
  int y_i = 0;
  int y_j = 0;
  double lambda = 1.0;
  GroupKey group_i;
  GroupKey group_j;
  std::vector<int> neighbors;  // sorted, unique, base node indices
};

// Base graph plus injected mixed nodes with virtual ids N..N+M-1. Injected
// nodes aggregate from base nodes only; base adjacency is untouched, so base
// embeddings match the plain graph exactly.
struct AugmentedGraph {
  const Graph* base = nullptr;
  std::vector<MixPair> pairs;
  std::vector<MixedEgoNetwork> injected;

  int num_injected() const { return static_cast<int>(injected.size()); }
  // Base features with x_mix rows appended: (N+M) x D.
  Matrix build_features() const;
  std::vector<std::vector<int>> neighbor_lists() const;
};

enum class DegreeMode { global, interpolated };

struct CnmConfig {
  double eta = 0.5;        // P(inter_class); mu >= eta picks inter_domain
  double beta_alpha = 1.0; // lambda ~ Beta(alpha, alpha)
  DegreeMode degree_mode = DegreeMode::global;
};

MixKind choose_kind(double eta, Rng& rng);

// Uniform draw over the union of groups that qualify as counterexamples for
// node i under `kind`. Throws "no counterexample..." when the union is empty.
int sample_counterexample(const GroupTable& groups, const Graph& graph, int i, MixKind kind,
                          Rng& rng);

std::vector<double> mix_features(std::span<const double> x_i, std::span<const double> x_j,
                                 double lambda);

// lambda * e_{y_i} + (1 - lambda) * e_{y_j} as a dense row.
std::vector<double> soft_label(int y_i, int y_j, double lambda, int num_classes);

// Union support with prob(v) = lambda p_i(v) + (1-lambda) p_j(v). An empty
// side cedes its share to the other one; both empty is an error
// ("isolated pair").
NeighborDistribution mix_neighbor_distribution(const NeighborDistribution& p_i,
                                               const NeighborDistribution& p_j, double lambda);

// Draws a target degree from deg_dist, clamps it to [1, |support|], then
// samples that many distinct neighbors without replacement proportional to
// p_mix.
std::vector<int> sample_ego_neighbors(const NeighborDistribution& p_mix,
                                      const DegreeDistribution& deg_dist, Rng& rng);

// One mixed ego-network per train node, rebuilt every call with fresh pairs
// and lambdas. Each node consumes an independent substream derived from
// (run_seed, epoch, node), so results do not depend on iteration order.
AugmentedGraph build_augmented_graph(const Graph& graph, const GroupTable& groups,
                                     const CnmConfig& cfg, uint64_t run_seed, long epoch);

// Source occurrences per group for one augmented graph; both pair members
// count.
std::map<GroupKey, long> pair_occurrences(const AugmentedGraph& aug);

struct IndependenceReport {
  double max_deviation = 0.0;
  std::vector<int> excluded_sensitive;  // s-buckets with zero occurrences
};

// max over (y,s) of |P(Y=y|S=s) - P(Y=y)| from occurrence counts, skipping
// (and reporting) sensitive buckets that never occur.
IndependenceReport verify_independence(const std::map<GroupKey, long>& counts);

}  // namespace fairgb
