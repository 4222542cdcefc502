#pragma once

#include <span>
#include <vector>

#include "fairgb/matrix.hpp"

namespace fairgb {

// Row-wise softmax with max-subtraction.
Matrix softmax_rows(const Matrix& logits);

struct SoftmaxCeResult {
  std::vector<double> loss;  // per row
  Matrix grad;               // d loss_i / d logits_i = softmax(logits_i) - target_i
};

// Cross-entropy against soft-label rows. Each target row must sum to 1
// (within 1e-6), otherwise a contract error is thrown.
SoftmaxCeResult softmax_cross_entropy(const Matrix& logits, const Matrix& targets);

// Convenience for hard labels: loss/grad of CE(logits_i, y_i).
SoftmaxCeResult softmax_cross_entropy(const Matrix& logits, std::span<const int> labels);

// All learnable tensors of a model plus Adam moments. The parameter layout
// (which index is which layer) is owned by the encoder module; nn only sees
// a flat list.
struct ModelState {
  std::vector<Matrix> params;
  std::vector<Matrix> grads;
  std::vector<Matrix> m;  // first moments
  std::vector<Matrix> v;  // second moments
  long step = 0;

  int add_param(Matrix w);  // returns index
  void zero_grads();
  void check_consistent() const;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // L2 added to the gradient, torch.optim.Adam style
};

// One Adam update with bias correction over all parameters in `state`,
// consuming state.grads.
void adam_step(ModelState& state, const AdamConfig& cfg);

}  // namespace fairgb
