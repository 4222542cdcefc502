#pragma once

#include <span>
#include <vector>

#include "fairgb/graph.hpp"
#include "fairgb/matrix.hpp"
#include "fairgb/nn.hpp"
#include "fairgb/rng.hpp"

namespace fairgb {

enum class EncoderKind { gcn, sage, gin };

struct EncoderConfig {
  EncoderKind kind = EncoderKind::gcn;
  int layers = 2;
  int hidden_dim = 16;
  int embed_dim = 16;
  double dropout = 0.5;

  void validate() const;
};

// Sparse row-gather aggregation operator. Rows are aggregation outputs,
// columns inputs; square for plain graphs. Appended rows (mixed nodes) pull
// from base columns plus, for normalized ops, their own column.
struct AggOp {
  int num_rows = 0;
  int num_cols = 0;
  std::vector<int> offsets;  // size num_rows + 1
  std::vector<int> cols;
  std::vector<double> weights;

  Matrix apply(const Matrix& x) const;
  Matrix apply_transpose(const Matrix& grad) const;
};

// Symmetric GCN normalization with self-loops: entry (v,u) is
// 1/sqrt((deg(v)+1)(deg(u)+1)) for u adjacent to v, and 1/(deg(v)+1) on the
// diagonal. Appended rows use their sampled neighbor count as degree and the
// base degrees of their neighbors.
AggOp gcn_norm_op(const Csr& adj, std::span<const std::vector<int>> injected = {});

// Mean over neighbors; empty row for isolated nodes.
AggOp mean_op(const Csr& adj, std::span<const std::vector<int>> injected = {});

// Sum over neighbors.
AggOp sum_op(const Csr& adj, std::span<const std::vector<int>> injected = {});

// The aggregation each encoder kind consumes: gcn -> gcn_norm_op,
// sage -> mean_op, gin -> sum_op.
AggOp build_agg(EncoderKind kind, const Csr& adj,
                std::span<const std::vector<int>> injected = {});

struct LayerCache {
  Matrix input;       // layer input after dropout
  Matrix mask;        // dropout scale factors; empty in eval mode
  Matrix pre_act;     // layer output before the between-layer ReLU
  Matrix concat;      // sage: [input, mean-of-neighbors]
  Matrix aggregated;  // gin: (1+eps) input + neighbor sum
  Matrix mlp_pre;     // gin: hidden pre-activation of the internal MLP
};

struct ForwardCache {
  std::vector<LayerCache> layers;
  Matrix embeddings;
};

// Glorot-uniform weights, zero biases. Parameter order: per layer [W, b]
// (gin: [W1, b1, W2, b2]), then the classifier head [W, b].
ModelState init_model(const EncoderConfig& cfg, int in_dim, int num_classes, Rng& rng);

// Runs the message-passing stack. dropout_rng == nullptr means eval mode
// (no dropout). ReLU is applied between layers, not after the last one.
Matrix encode(const AggOp& agg, const Matrix& x, const EncoderConfig& cfg,
              const ModelState& state, ForwardCache& cache, Rng* dropout_rng);

// Affine head on top of embeddings.
Matrix classify(const Matrix& z, const EncoderConfig& cfg, const ModelState& state);

// Accumulates parameter gradients for head and encoder given dL/dlogits.
void model_backward(const AggOp& agg, const EncoderConfig& cfg, ModelState& state,
                    const ForwardCache& cache, const Matrix& dlogits);

}  // namespace fairgb
