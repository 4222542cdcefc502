#pragma once

#include <map>
#include <span>
#include <vector>

#include "fairgb/cnm.hpp"
#include "fairgb/graph.hpp"
#include "fairgb/matrix.hpp"
#include "fairgb/rng.hpp"

namespace fairgb {

// L1 norm of d CE(logits, y) / d logits, i.e. |softmax(logits) - onehot(y)|_1.
double contribution(std::span<const double> logits, int y);

// One pair side's bookkeeping: which group the source node belongs to and
// the measured contribution.
struct PairContribution {
  GroupKey group_i;
  GroupKey group_j;
  double r_i = 0.0;
  double r_j = 0.0;
};

// Contributions of both sides of every mixed node against that node's logits.
std::vector<PairContribution> pair_contributions(const Matrix& logits,
                                                 std::span<const MixedEgoNetwork> pairs);

// Per-group contribution totals for one epoch.
struct ContributionLedger {
  std::map<GroupKey, double> r;
  long epoch = 0;

  double total() const;
};

ContributionLedger accumulate(std::span<const PairContribution> sides, long epoch);

struct GroupWeights {
  std::map<GroupKey, double> w;
};

// w_{t,b} = total / R_{t,b}. Denominators below `floor` are clamped to it
// and the resulting weights capped at 100x the mean weight. Throws
// "no contributions" when every entry is zero.
GroupWeights group_weights(const ContributionLedger& ledger, double floor = 1e-3);

// Weight 1 for every group a pair references.
GroupWeights unit_weights(std::span<const MixedEgoNetwork> pairs);

struct CalResult {
  double loss = 0.0;
  Matrix grad;  // d loss / d logits, one row per mixed node
};

// Mean over pairs of w_i lambda CE(logits, y_i) + w_j (1-lambda) CE(logits, y_j).
// Weights are constants; no gradient flows through them. Throws when a
// referenced group has no weight.
CalResult cal_loss(const Matrix& logits, std::span<const MixedEgoNetwork> pairs,
                   const GroupWeights& weights);

// The unweighted decomposed mixup loss: cal_loss with unit weights.
CalResult mixup_loss(const Matrix& logits, std::span<const MixedEgoNetwork> pairs);

// loss = (1/N) sum_i w_i CE(logits_i, y_i) with matching gradient rows.
CalResult weighted_ce(const Matrix& logits, std::span<const int> labels,
                      std::span<const double> row_weights);

// Re-weighting baseline: node weight N_train / |D_{y,s}| for its group.
std::map<int, double> rw_weights(const GroupTable& groups);

// Oversampling baseline: sources of the duplicates that top every group up
// to the largest group's size, drawn uniformly with replacement per group.
struct OversamplePlan {
  std::vector<int> sources;
};

OversamplePlan oversample(const GroupTable& groups, Rng& rng);

// Duplicates as injected nodes: exact copies (features, label pair collapsed
// to the node's label, full neighbor list).
AugmentedGraph materialize_oversample(const Graph& graph, const OversamplePlan& plan);

}  // namespace fairgb
