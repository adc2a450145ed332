#pragma once

#include "seld3d/tensor.hpp"

namespace seld3d::detail {

inline constexpr double kLeakyAlpha = 0.01;

inline double leaky_relu(double x) { return x > 0.0 ? x : kLeakyAlpha * x; }

// Slope at exactly 0 follows the alpha branch, matching leaky_relu.
inline double leaky_relu_slope(double x) { return x > 0.0 ? 1.0 : kLeakyAlpha; }

// y = M x + b with M of shape {rows, cols}; b may be null.
inline void matvec(const TensorD& m, const double* x, const double* b, double* y) {
  const std::size_t rows = m.dim(0);
  const std::size_t cols = m.dim(1);
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = b ? b[r] : 0.0;
    const double* row = m.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

// y = M^T x with M of shape {rows, cols}; y has cols entries.
inline void matvec_transposed(const TensorD& m, const double* x, double* y) {
  const std::size_t rows = m.dim(0);
  const std::size_t cols = m.dim(1);
  for (std::size_t c = 0; c < cols; ++c) y[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = m.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) y[c] += row[c] * x[r];
  }
}

// m += u v^T with m of shape {|u|, |v|}.
inline void outer_accumulate(TensorD& m, const double* u, const double* v) {
  const std::size_t rows = m.dim(0);
  const std::size_t cols = m.dim(1);
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = m.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) row[c] += u[r] * v[c];
  }
}

}  // namespace seld3d::detail
