#ifndef SIGNSKIP_TENSOR_HPP
#define SIGNSKIP_TENSOR_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "signskip/error.hpp"
#include "signskip/parallel.hpp"

namespace signskip {

// Flat fp32 value types. All kernels in the project accumulate in a fixed
// left-to-right order so the dense reference path and the row-skipping path
// can be compared bit for bit.

struct DenseVector {
  std::vector<float> data;

  DenseVector() = default;
  explicit DenseVector(std::size_t n, float fill = 0.0f) : data(n, fill) {}
  DenseVector(std::initializer_list<float> init) : data(init) {}

  std::size_t size() const { return data.size(); }
  float& operator[](std::size_t i) { return data[i]; }
  float operator[](std::size_t i) const { return data[i]; }
};

// Row-major k x d matrix; row i holds the weights producing output element i.
struct DenseMatrix {
  std::vector<float> data;
  std::size_t rows = 0;
  std::size_t cols = 0;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c, float fill = 0.0f)
      : data(r * c, fill), rows(r), cols(c) {}

  const float* row(std::size_t i) const { return data.data() + i * cols; }
  float* row(std::size_t i) { return data.data() + i * cols; }
  float at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  float& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
};

// Activation cutoff; theta = 0 recovers plain ReLU, positive values zero
// everything at or below theta.
struct ActivationThreshold {
  float theta = 0.0f;
};

inline void check_finite(const DenseVector& v, const std::string& what) {
  for (float x : v.data)
    if (!std::isfinite(x))
      throw value_error(what + ": non-finite element");
}

inline void check_finite(const DenseMatrix& m, const std::string& what) {
  for (float x : m.data)
    if (!std::isfinite(x))
      throw value_error(what + ": non-finite element");
}

// Sequential left-to-right inner product. Shared by the dense and sparse
// GEMV paths; the bit-equality contract between them depends on both sides
// calling exactly this accumulation.
inline float row_dot(const float* w, const float* x, std::size_t n) {
  float acc = 0.0f;
  for (std::size_t j = 0; j < n; ++j) acc += w[j] * x[j];
  return acc;
}

// out[i] = <row i of W, x>. Reference path for X*W_gate etc.
inline DenseVector dense_gemv(const DenseMatrix& W, const DenseVector& x,
                              unsigned threads = 1) {
  if (x.size() != W.cols)
    throw shape_error("dense_gemv: x.len " + std::to_string(x.size()) +
                      " != W.cols " + std::to_string(W.cols));
  DenseVector out(W.rows);
  parallel_for(W.rows, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      out[i] = row_dot(W.row(i), x.data.data(), W.cols);
  });
  return out;
}

// out[i] = v[i] if v[i] > theta else 0. Zeros are produced as +0.0f.
inline DenseVector relu_theta(const DenseVector& v, ActivationThreshold t) {
  DenseVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out[i] = v[i] > t.theta ? v[i] : 0.0f;
  return out;
}

inline DenseVector hadamard(const DenseVector& a, const DenseVector& b) {
  if (a.size() != b.size())
    throw shape_error("hadamard: length mismatch " + std::to_string(a.size()) +
                      " vs " + std::to_string(b.size()));
  DenseVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

}  // namespace signskip

#endif  // SIGNSKIP_TENSOR_HPP
