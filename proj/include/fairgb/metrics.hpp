#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fairgb/graph.hpp"

namespace fairgb {

// Fairness and utility metrics for binary classification with a binary
// sensitive value (positive class 1, groups 0 and 1). Each returns nullopt
// when its definition has an empty denominator instead of inventing a value.

// |P(pred=1 | s=0) - P(pred=1 | s=1)|. Undefined if either group is empty.
std::optional<double> delta_sp(std::span<const int> y_pred, std::span<const int> sensitive);

// True-positive-rate gap |TPR(s=0) - TPR(s=1)|. Undefined if either group
// has no positive nodes.
std::optional<double> delta_eo(std::span<const int> y_true, std::span<const int> y_pred,
                               std::span<const int> sensitive);

// max(TPR gap, FPR gap). Undefined if either group lacks positives or
// negatives.
std::optional<double> delta_eodds(std::span<const int> y_true, std::span<const int> y_pred,
                                  std::span<const int> sensitive);

// Probability a random positive outscores a random negative, ties counted
// half. Computed by rank averaging. Undefined with a single class present.
std::optional<double> auc(std::span<const int> y_true, std::span<const double> score);

// Harmonic mean of precision and recall for class 1. Undefined when either
// component has an empty denominator; 0 when both are defined but zero.
std::optional<double> f1_score(std::span<const int> y_true, std::span<const int> y_pred);

// Fraction of matching predictions. Undefined on empty input.
std::optional<double> accuracy(std::span<const int> y_true, std::span<const int> y_pred);

struct Evaluation {
  std::optional<double> accuracy;
  std::optional<double> f1;
  std::optional<double> auc;
  std::optional<double> delta_sp;
  std::optional<double> delta_eo;
  std::optional<double> delta_eodds;
};

// Scores all metrics over the given nodes. `prob_positive` holds P(y=1) for
// every node of the graph; predictions are thresholded at 0.5.
Evaluation evaluate_nodes(const Graph& graph, std::span<const int> nodes,
                          std::span<const double> prob_positive);

}  // namespace fairgb
