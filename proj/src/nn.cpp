#include "fairgb/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace fairgb {

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows, logits.cols);
  for (int i = 0; i < logits.rows; ++i) {
    const auto row = logits.row(i);
    double mx = row[0];
    for (double v : row) mx = std::max(mx, v);
    double denom = 0.0;
    for (int j = 0; j < logits.cols; ++j) {
      out.at(i, j) = std::exp(row[j] - mx);
      denom += out.at(i, j);
    }
    for (int j = 0; j < logits.cols; ++j) out.at(i, j) /= denom;
  }
  return out;
}

SoftmaxCeResult softmax_cross_entropy(const Matrix& logits, const Matrix& targets) {
  if (logits.rows != targets.rows || logits.cols != targets.cols) {
    throw std::invalid_argument("softmax_cross_entropy: shape mismatch");
  }
  logits.check_finite("softmax_cross_entropy logits");
  SoftmaxCeResult res;
  res.loss.resize(logits.rows);
  res.grad = Matrix(logits.rows, logits.cols);
  for (int i = 0; i < logits.rows; ++i) {
    double tsum = 0.0;
    for (int j = 0; j < logits.cols; ++j) tsum += targets.at(i, j);
    if (std::abs(tsum - 1.0) > 1e-6) {
      throw std::invalid_argument("softmax_cross_entropy: target row does not sum to 1");
    }
    const auto row = logits.row(i);
    double mx = row[0];
    for (double v : row) mx = std::max(mx, v);
    double denom = 0.0;
    for (int j = 0; j < logits.cols; ++j) denom += std::exp(row[j] - mx);
    const double log_denom = std::log(denom);
    double loss = 0.0;
    for (int j = 0; j < logits.cols; ++j) {
      const double log_p = row[j] - mx - log_denom;
      const double p = std::exp(log_p);
      loss -= targets.at(i, j) * log_p;
      res.grad.at(i, j) = p - targets.at(i, j);
    }
    res.loss[i] = loss;
  }
  return res;
}

SoftmaxCeResult softmax_cross_entropy(const Matrix& logits, std::span<const int> labels) {
  if (static_cast<int>(labels.size()) != logits.rows) {
    throw std::invalid_argument("softmax_cross_entropy: label count mismatch");
  }
  Matrix targets(logits.rows, logits.cols);
  for (int i = 0; i < logits.rows; ++i) {
    const int y = labels[i];
    if (y < 0 || y >= logits.cols) throw std::invalid_argument("softmax_cross_entropy: label out of range");
    targets.at(i, y) = 1.0;
  }
  return softmax_cross_entropy(logits, targets);
}

int ModelState::add_param(Matrix w) {
  const int idx = static_cast<int>(params.size());
  grads.emplace_back(w.rows, w.cols);
  m.emplace_back(w.rows, w.cols);
  v.emplace_back(w.rows, w.cols);
  params.push_back(std::move(w));
  return idx;
}

void ModelState::zero_grads() {
  for (auto& g : grads) g.fill(0.0);
}

void ModelState::check_consistent() const {
  if (params.size() != grads.size() || params.size() != m.size() || params.size() != v.size()) {
    throw std::runtime_error("ModelState: parameter/moment count mismatch");
  }
  for (size_t i = 0; i < params.size(); ++i) {
    if (params[i].rows != grads[i].rows || params[i].cols != grads[i].cols ||
        params[i].rows != m[i].rows || params[i].cols != m[i].cols ||
        params[i].rows != v[i].rows || params[i].cols != v[i].cols) {
      throw std::runtime_error("ModelState: shape mismatch at parameter " + std::to_string(i));
    }
  }
}

void adam_step(ModelState& state, const AdamConfig& cfg) {
  state.check_consistent();
  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (size_t p = 0; p < state.params.size(); ++p) {
    auto& w = state.params[p];
    const auto& g = state.grads[p];
    auto& m1 = state.m[p];
    auto& m2 = state.v[p];
    for (size_t i = 0; i < w.data.size(); ++i) {
      const double grad = g.data[i] + cfg.weight_decay * w.data[i];
      m1.data[i] = cfg.beta1 * m1.data[i] + (1.0 - cfg.beta1) * grad;
      m2.data[i] = cfg.beta2 * m2.data[i] + (1.0 - cfg.beta2) * grad * grad;
      const double mhat = m1.data[i] / bc1;
      const double vhat = m2.data[i] / bc2;
      w.data[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
    w.check_finite("adam_step parameter");
  }
}

}  // namespace fairgb
