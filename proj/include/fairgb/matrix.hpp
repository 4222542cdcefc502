#pragma once

#include <span>
#include <string>
#include <vector>

namespace fairgb {

class Rng;

// Dense row-major real matrix. The only tensor type in the library; biases
// are 1xC matrices. Entries are expected to stay finite; check_finite throws
// when they do not.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0);

  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
  std::span<double> row(int r) { return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)}; }
  std::span<const double> row(int r) const {
    return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
  }

  bool empty() const { return data.empty(); }
  void fill(double v);
  void check_finite(const std::string& what) const;
};

// a(m,k) * b(k,n) -> (m,n); shape mismatch throws.
Matrix matmul(const Matrix& a, const Matrix& b);
// a^T * b
Matrix matmul_at(const Matrix& a, const Matrix& b);
// a * b^T
Matrix matmul_bt(const Matrix& a, const Matrix& b);

// m[r] += bias (bias is 1 x m.cols)
void add_bias(Matrix& m, const Matrix& bias);
// column sums as 1 x cols
Matrix colsum(const Matrix& m);

Matrix relu(const Matrix& m);
// Gradient passes only where the forward input was > 0.
Matrix relu_backward(const Matrix& input, const Matrix& grad);

// Inverted dropout. rate must be in [0, 1). The kept entries are scaled by
// 1/(1-rate); mask_out (if non-null) receives the applied scale per entry so
// the backward pass can reuse it. rate == 0 is the identity and draws nothing.
Matrix dropout_forward(const Matrix& m, double rate, Rng& rng, Matrix* mask_out);
Matrix dropout_backward(const Matrix& grad, const Matrix& mask);

// y += a * x (same shape)
void axpy(Matrix& y, double a, const Matrix& x);
// [a | b] column-wise concatenation
Matrix hstack(const Matrix& a, const Matrix& b);

}  // namespace fairgb
