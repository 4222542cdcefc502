#include "fairgb/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fairgb/rng.hpp"

namespace fairgb {

Matrix::Matrix(int r, int c, double fill)
    : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {
  if (r < 0 || c < 0) throw std::invalid_argument("Matrix: negative shape");
}

void Matrix::fill(double v) { std::fill(data.begin(), data.end(), v); }

void Matrix::check_finite(const std::string& what) const {
  for (double v : data) {
    if (!std::isfinite(v)) {
      throw std::runtime_error("non-finite value in " + what);
    }
  }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw std::invalid_argument("matmul: shape mismatch");
  Matrix out(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = a.data.data() + static_cast<size_t>(i) * a.cols;
    double* orow = out.data.data() + static_cast<size_t>(i) * out.cols;
    for (int k = 0; k < a.cols; ++k) {
      const double av = arow[k];
      if (av == 0.0) continue;
      const double* brow = b.data.data() + static_cast<size_t>(k) * b.cols;
      for (int j = 0; j < b.cols; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

Matrix matmul_at(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows) throw std::invalid_argument("matmul_at: shape mismatch");
  Matrix out(a.cols, b.cols);
  for (int k = 0; k < a.rows; ++k) {
    const double* arow = a.data.data() + static_cast<size_t>(k) * a.cols;
    const double* brow = b.data.data() + static_cast<size_t>(k) * b.cols;
    for (int i = 0; i < a.cols; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* orow = out.data.data() + static_cast<size_t>(i) * out.cols;
      for (int j = 0; j < b.cols; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

Matrix matmul_bt(const Matrix& a, const Matrix& b) {
  if (a.cols != b.cols) throw std::invalid_argument("matmul_bt: shape mismatch");
  Matrix out(a.rows, b.rows);
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = a.data.data() + static_cast<size_t>(i) * a.cols;
    for (int j = 0; j < b.rows; ++j) {
      const double* brow = b.data.data() + static_cast<size_t>(j) * b.cols;
      double s = 0.0;
      for (int k = 0; k < a.cols; ++k) s += arow[k] * brow[k];
      out.at(i, j) = s;
    }
  }
  return out;
}

void add_bias(Matrix& m, const Matrix& bias) {
  if (bias.rows != 1 || bias.cols != m.cols) throw std::invalid_argument("add_bias: shape mismatch");
  for (int i = 0; i < m.rows; ++i) {
    double* row = m.data.data() + static_cast<size_t>(i) * m.cols;
    for (int j = 0; j < m.cols; ++j) row[j] += bias.data[j];
  }
}

Matrix colsum(const Matrix& m) {
  Matrix out(1, m.cols);
  for (int i = 0; i < m.rows; ++i) {
    const double* row = m.data.data() + static_cast<size_t>(i) * m.cols;
    for (int j = 0; j < m.cols; ++j) out.data[j] += row[j];
  }
  return out;
}

Matrix relu(const Matrix& m) {
  Matrix out = m;
  for (double& v : out.data) v = v > 0.0 ? v : 0.0;
  return out;
}

Matrix relu_backward(const Matrix& input, const Matrix& grad) {
  if (input.rows != grad.rows || input.cols != grad.cols) {
    throw std::invalid_argument("relu_backward: shape mismatch");
  }
  Matrix out = grad;
  for (size_t i = 0; i < out.data.size(); ++i) {
    if (input.data[i] <= 0.0) out.data[i] = 0.0;
  }
  return out;
}

Matrix dropout_forward(const Matrix& m, double rate, Rng& rng, Matrix* mask_out) {
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout: rate must be in [0,1)");
  if (rate == 0.0) {
    if (mask_out) *mask_out = Matrix();
    return m;
  }
  const double scale = 1.0 / (1.0 - rate);
  Matrix mask(m.rows, m.cols);
  Matrix out(m.rows, m.cols);
  for (size_t i = 0; i < m.data.size(); ++i) {
    const double keep = rng.uniform() >= rate ? scale : 0.0;
    mask.data[i] = keep;
    out.data[i] = m.data[i] * keep;
  }
  if (mask_out) *mask_out = std::move(mask);
  return out;
}

Matrix dropout_backward(const Matrix& grad, const Matrix& mask) {
  if (mask.empty()) return grad;  // rate-0 forward was the identity
  if (mask.rows != grad.rows || mask.cols != grad.cols) {
    throw std::invalid_argument("dropout_backward: shape mismatch");
  }
  Matrix out = grad;
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= mask.data[i];
  return out;
}

void axpy(Matrix& y, double a, const Matrix& x) {
  if (y.rows != x.rows || y.cols != x.cols) throw std::invalid_argument("axpy: shape mismatch");
  for (size_t i = 0; i < y.data.size(); ++i) y.data[i] += a * x.data[i];
}

Matrix hstack(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows) throw std::invalid_argument("hstack: row mismatch");
  Matrix out(a.rows, a.cols + b.cols);
  for (int i = 0; i < a.rows; ++i) {
    double* orow = out.data.data() + static_cast<size_t>(i) * out.cols;
    const double* arow = a.data.data() + static_cast<size_t>(i) * a.cols;
    const double* brow = b.data.data() + static_cast<size_t>(i) * b.cols;
    std::copy(arow, arow + a.cols, orow);
    std::copy(brow, brow + b.cols, orow + a.cols);
  }
  return out;
}

}  // namespace fairgb
