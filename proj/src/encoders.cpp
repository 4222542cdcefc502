#include "fairgb/encoders.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fairgb {

namespace {

constexpr double kGinEps = 0.0;  // fixed, not learned

void add_row(AggOp& op, std::vector<std::pair<int, double>>& entries) {
  std::sort(entries.begin(), entries.end());
  for (auto& [c, w] : entries) {
    op.cols.push_back(c);
    op.weights.push_back(w);
  }
  op.offsets.push_back(static_cast<int>(op.cols.size()));
  entries.clear();
}

void check_injected(const Csr& adj, std::span<const std::vector<int>> injected) {
  for (const auto& nbrs : injected) {
    for (int u : nbrs) {
      if (u < 0 || u >= adj.n) {
        throw std::invalid_argument("agg op: injected neighbor " + std::to_string(u) +
                                    " is not a base node");
      }
    }
  }
}

}  // namespace

void EncoderConfig::validate() const {
  if (layers < 1) throw std::invalid_argument("encoder config: layers must be >= 1");
  if (hidden_dim < 1 || embed_dim < 1) {
    throw std::invalid_argument("encoder config: dims must be >= 1");
  }
  if (dropout < 0.0 || dropout >= 1.0) {
    throw std::invalid_argument("encoder config: dropout must lie in [0,1)");
  }
}

Matrix AggOp::apply(const Matrix& x) const {
  if (x.rows != num_cols) throw std::invalid_argument("agg apply: row count mismatch");
  Matrix out(num_rows, x.cols);
  for (int r = 0; r < num_rows; ++r) {
    for (int e = offsets[r]; e < offsets[r + 1]; ++e) {
      const double w = weights[e];
      const double* src = x.data.data() + static_cast<size_t>(cols[e]) * x.cols;
      double* dst = out.data.data() + static_cast<size_t>(r) * x.cols;
      for (int c = 0; c < x.cols; ++c) dst[c] += w * src[c];
    }
  }
  return out;
}

Matrix AggOp::apply_transpose(const Matrix& grad) const {
  if (grad.rows != num_rows) {
    throw std::invalid_argument("agg apply_transpose: row count mismatch");
  }
  Matrix out(num_cols, grad.cols);
  for (int r = 0; r < num_rows; ++r) {
    for (int e = offsets[r]; e < offsets[r + 1]; ++e) {
      const double w = weights[e];
      const double* src = grad.data.data() + static_cast<size_t>(r) * grad.cols;
      double* dst = out.data.data() + static_cast<size_t>(cols[e]) * grad.cols;
      for (int c = 0; c < grad.cols; ++c) dst[c] += w * src[c];
    }
  }
  return out;
}

AggOp gcn_norm_op(const Csr& adj, std::span<const std::vector<int>> injected) {
  check_injected(adj, injected);
  AggOp op;
  op.num_rows = op.num_cols = adj.n + static_cast<int>(injected.size());
  op.offsets.push_back(0);
  std::vector<std::pair<int, double>> entries;
  for (int v = 0; v < adj.n; ++v) {
    const double dv = adj.degree(v) + 1.0;
    for (int u : adj.neighbors(v)) {
      entries.emplace_back(u, 1.0 / std::sqrt(dv * (adj.degree(u) + 1.0)));
    }
    entries.emplace_back(v, 1.0 / dv);
    add_row(op, entries);
  }
  for (size_t m = 0; m < injected.size(); ++m) {
    const double dm = static_cast<double>(injected[m].size()) + 1.0;
    for (int u : injected[m]) {
      entries.emplace_back(u, 1.0 / std::sqrt(dm * (adj.degree(u) + 1.0)));
    }
    entries.emplace_back(adj.n + static_cast<int>(m), 1.0 / dm);
    add_row(op, entries);
  }
  return op;
}

AggOp mean_op(const Csr& adj, std::span<const std::vector<int>> injected) {
  check_injected(adj, injected);
  AggOp op;
  op.num_rows = op.num_cols = adj.n + static_cast<int>(injected.size());
  op.offsets.push_back(0);
  std::vector<std::pair<int, double>> entries;
  for (int v = 0; v < adj.n; ++v) {
    const int d = adj.degree(v);
    for (int u : adj.neighbors(v)) entries.emplace_back(u, 1.0 / d);
    add_row(op, entries);
  }
  for (const auto& nbrs : injected) {
    for (int u : nbrs) entries.emplace_back(u, 1.0 / static_cast<double>(nbrs.size()));
    add_row(op, entries);
  }
  return op;
}

AggOp sum_op(const Csr& adj, std::span<const std::vector<int>> injected) {
  check_injected(adj, injected);
  AggOp op;
  op.num_rows = op.num_cols = adj.n + static_cast<int>(injected.size());
  op.offsets.push_back(0);
  std::vector<std::pair<int, double>> entries;
  for (int v = 0; v < adj.n; ++v) {
    for (int u : adj.neighbors(v)) entries.emplace_back(u, 1.0);
    add_row(op, entries);
  }
  for (const auto& nbrs : injected) {
    for (int u : nbrs) entries.emplace_back(u, 1.0);
    add_row(op, entries);
  }
  return op;
}

AggOp build_agg(EncoderKind kind, const Csr& adj, std::span<const std::vector<int>> injected) {
  switch (kind) {
    case EncoderKind::gcn:
      return gcn_norm_op(adj, injected);
    case EncoderKind::sage:
      return mean_op(adj, injected);
    case EncoderKind::gin:
      return sum_op(adj, injected);
  }
  throw std::invalid_argument("build_agg: unknown encoder kind");
}

namespace {

int layer_in_dim(const EncoderConfig& cfg, int in_dim, int layer) {
  return layer == 0 ? in_dim : cfg.hidden_dim;
}

int layer_out_dim(const EncoderConfig& cfg, int layer) {
  return layer == cfg.layers - 1 ? cfg.embed_dim : cfg.hidden_dim;
}

int params_per_layer(EncoderKind kind) { return kind == EncoderKind::gin ? 4 : 2; }

Matrix glorot(int rows, int cols, Rng& rng) {
  Matrix w(rows, cols);
  const double a = std::sqrt(6.0 / (rows + cols));
  for (double& v : w.data) v = rng.uniform(-a, a);
  return w;
}

// Input width implied by the first layer's weight shape.
int model_in_dim(const EncoderConfig& cfg, const ModelState& state) {
  const int rows = state.params[0].rows;
  return cfg.kind == EncoderKind::sage ? rows / 2 : rows;
}

int head_param_index(const EncoderConfig& cfg) {
  return cfg.layers * params_per_layer(cfg.kind);
}

}  // namespace

ModelState init_model(const EncoderConfig& cfg, int in_dim, int num_classes, Rng& rng) {
  cfg.validate();
  if (in_dim < 1 || num_classes < 2) {
    throw std::invalid_argument("init_model: need in_dim >= 1 and num_classes >= 2");
  }
  ModelState state;
  for (int l = 0; l < cfg.layers; ++l) {
    const int din = layer_in_dim(cfg, in_dim, l);
    const int dout = layer_out_dim(cfg, l);
    switch (cfg.kind) {
      case EncoderKind::gcn:
        state.add_param(glorot(din, dout, rng));
        state.add_param(Matrix(1, dout));
        break;
      case EncoderKind::sage:
        state.add_param(glorot(2 * din, dout, rng));
        state.add_param(Matrix(1, dout));
        break;
      case EncoderKind::gin:
        state.add_param(glorot(din, dout, rng));
        state.add_param(Matrix(1, dout));
        state.add_param(glorot(dout, dout, rng));
        state.add_param(Matrix(1, dout));
        break;
    }
  }
  state.add_param(glorot(cfg.embed_dim, num_classes, rng));
  state.add_param(Matrix(1, num_classes));
  return state;
}

Matrix encode(const AggOp& agg, const Matrix& x, const EncoderConfig& cfg,
              const ModelState& state, ForwardCache& cache, Rng* dropout_rng) {
  cfg.validate();
  state.check_consistent();
  if (x.rows != agg.num_cols) {
    throw std::invalid_argument("encode: feature rows != aggregation size");
  }
  if (x.cols != model_in_dim(cfg, state)) {
    throw std::invalid_argument("encode: feature width " + std::to_string(x.cols) +
                                " does not match model input width " +
                                std::to_string(model_in_dim(cfg, state)));
  }
  cache.layers.assign(cfg.layers, {});

  Matrix h = x;
  const int per_layer = params_per_layer(cfg.kind);
  for (int l = 0; l < cfg.layers; ++l) {
    LayerCache& lc = cache.layers[l];
    if (dropout_rng && cfg.dropout > 0.0) {
      lc.input = dropout_forward(h, cfg.dropout, *dropout_rng, &lc.mask);
    } else {
      lc.input = std::move(h);
    }
    const int p = l * per_layer;
    switch (cfg.kind) {
      case EncoderKind::gcn: {
        Matrix xw = matmul(lc.input, state.params[p]);
        lc.pre_act = agg.apply(xw);
        add_bias(lc.pre_act, state.params[p + 1]);
        break;
      }
      case EncoderKind::sage: {
        Matrix mean = agg.apply(lc.input);
        lc.concat = hstack(lc.input, mean);
        lc.pre_act = matmul(lc.concat, state.params[p]);
        add_bias(lc.pre_act, state.params[p + 1]);
        break;
      }
      case EncoderKind::gin: {
        lc.aggregated = agg.apply(lc.input);
        axpy(lc.aggregated, 1.0 + kGinEps, lc.input);
        lc.mlp_pre = matmul(lc.aggregated, state.params[p]);
        add_bias(lc.mlp_pre, state.params[p + 1]);
        lc.pre_act = matmul(relu(lc.mlp_pre), state.params[p + 2]);
        add_bias(lc.pre_act, state.params[p + 3]);
        break;
      }
    }
    h = (l + 1 < cfg.layers) ? relu(lc.pre_act) : lc.pre_act;
  }
  cache.embeddings = h;
  return h;
}

Matrix classify(const Matrix& z, const EncoderConfig& cfg, const ModelState& state) {
  const int p = head_param_index(cfg);
  Matrix logits = matmul(z, state.params[p]);
  add_bias(logits, state.params[p + 1]);
  return logits;
}

void model_backward(const AggOp& agg, const EncoderConfig& cfg, ModelState& state,
                    const ForwardCache& cache, const Matrix& dlogits) {
  if (static_cast<int>(cache.layers.size()) != cfg.layers) {
    throw std::invalid_argument("model_backward: cache does not match config");
  }
  const int hp = head_param_index(cfg);
  Matrix& dwh = state.grads[hp];
  Matrix wh_grad = matmul_at(cache.embeddings, dlogits);
  axpy(dwh, 1.0, wh_grad);
  Matrix bh_grad = colsum(dlogits);
  axpy(state.grads[hp + 1], 1.0, bh_grad);

  Matrix dh = matmul_bt(dlogits, state.params[hp]);

  const int per_layer = params_per_layer(cfg.kind);
  for (int l = cfg.layers - 1; l >= 0; --l) {
    const LayerCache& lc = cache.layers[l];
    Matrix dpre = (l + 1 < cfg.layers) ? relu_backward(lc.pre_act, dh) : std::move(dh);
    const int p = l * per_layer;
    Matrix dinput;
    switch (cfg.kind) {
      case EncoderKind::gcn: {
        axpy(state.grads[p + 1], 1.0, colsum(dpre));
        Matrix dxw = agg.apply_transpose(dpre);
        axpy(state.grads[p], 1.0, matmul_at(lc.input, dxw));
        dinput = matmul_bt(dxw, state.params[p]);
        break;
      }
      case EncoderKind::sage: {
        axpy(state.grads[p + 1], 1.0, colsum(dpre));
        axpy(state.grads[p], 1.0, matmul_at(lc.concat, dpre));
        Matrix dconcat = matmul_bt(dpre, state.params[p]);
        const int din = lc.input.cols;
        Matrix dmean(dconcat.rows, din);
        dinput = Matrix(dconcat.rows, din);
        for (int r = 0; r < dconcat.rows; ++r) {
          for (int c = 0; c < din; ++c) {
            dinput.at(r, c) = dconcat.at(r, c);
            dmean.at(r, c) = dconcat.at(r, c + din);
          }
        }
        axpy(dinput, 1.0, agg.apply_transpose(dmean));
        break;
      }
      case EncoderKind::gin: {
        axpy(state.grads[p + 3], 1.0, colsum(dpre));
        Matrix h1 = relu(lc.mlp_pre);
        axpy(state.grads[p + 2], 1.0, matmul_at(h1, dpre));
        Matrix dh1 = matmul_bt(dpre, state.params[p + 2]);
        Matrix dmlp_pre = relu_backward(lc.mlp_pre, dh1);
        axpy(state.grads[p + 1], 1.0, colsum(dmlp_pre));
        axpy(state.grads[p], 1.0, matmul_at(lc.aggregated, dmlp_pre));
        Matrix dagg = matmul_bt(dmlp_pre, state.params[p]);
        dinput = agg.apply_transpose(dagg);
        axpy(dinput, 1.0 + kGinEps, dagg);
        break;
      }
    }
    dh = dropout_backward(dinput, lc.mask);
  }
}

}  // namespace fairgb
