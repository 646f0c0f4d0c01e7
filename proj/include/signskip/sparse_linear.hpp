#ifndef SIGNSKIP_SPARSE_LINEAR_HPP
#define SIGNSKIP_SPARSE_LINEAR_HPP

#include <atomic>
#include <cstdint>

#include "signskip/predictor.hpp"
#include "signskip/tensor.hpp"

namespace signskip {

// Optional multiply-accumulate accounting. Disabled by default; kernels test
// the flag once per call and add row-granular totals, so the inner loops are
// untouched.
namespace macs {

inline std::atomic<bool> enabled{false};
inline std::atomic<std::uint64_t> total{0};

inline void reset() { total.store(0, std::memory_order_relaxed); }

inline std::uint64_t count() { return total.load(std::memory_order_relaxed); }

inline bool on() { return enabled.load(std::memory_order_relaxed); }

inline void add(std::uint64_t n) {
  total.fetch_add(n, std::memory_order_relaxed);
}

}  // namespace macs

// Row-skipping GEMV: out[i] = 0 for skipped rows, otherwise bit-equal to the
// dense per-row dot (same accumulation order). Skipped rows read none of W's
// row data.
inline DenseVector sparse_gemv_rows(const DenseMatrix& W, const DenseVector& x,
                                    const SkipMask& skip,
                                    unsigned threads = 1) {
  if (x.size() != W.cols)
    throw shape_error("sparse_gemv_rows: x.len " + std::to_string(x.size()) +
                      " != W.cols " + std::to_string(W.cols));
  if (skip.size() != W.rows)
    throw shape_error("sparse_gemv_rows: skip.len " +
                      std::to_string(skip.size()) + " != W.rows " +
                      std::to_string(W.rows));
  DenseVector out(W.rows);
  parallel_for(W.rows, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      out[i] = skip.bits[i] ? 0.0f
                            : row_dot(W.row(i), x.data.data(), W.cols);
  });
  if (macs::on())
    macs::add(static_cast<std::uint64_t>(W.rows - skip.count_skipped()) *
              W.cols);
  return out;
}

// Down projection over rows of W_down^T: out = sum over non-skipped i of
// h3[i] * row_i, rows visited in ascending order. Parallelism partitions the
// output columns, so each out[j] still accumulates rows in the same order
// and the result is identical for any thread count. Skipped rows are neither
// read nor accumulated.
inline DenseVector accumulate_down(const DenseMatrix& w_down_t,
                                   const DenseVector& h3, const SkipMask& skip,
                                   unsigned threads = 1) {
  if (h3.size() != w_down_t.rows)
    throw shape_error("accumulate_down: h3.len " + std::to_string(h3.size()) +
                      " != rows " + std::to_string(w_down_t.rows));
  if (skip.size() != w_down_t.rows)
    throw shape_error("accumulate_down: skip.len " +
                      std::to_string(skip.size()) + " != rows " +
                      std::to_string(w_down_t.rows));
  DenseVector out(w_down_t.cols, 0.0f);
  parallel_for(w_down_t.cols, threads, [&](std::size_t col_begin, std::size_t col_end) {
    for (std::size_t i = 0; i < w_down_t.rows; ++i) {
      if (skip.bits[i]) continue;
      const float hi = h3[i];
      const float* row = w_down_t.row(i);
      for (std::size_t j = col_begin; j < col_end; ++j)
        out[j] += hi * row[j];
    }
  });
  if (macs::on())
    macs::add(static_cast<std::uint64_t>(w_down_t.rows - skip.count_skipped()) *
              w_down_t.cols);
  return out;
}

}  // namespace signskip

#endif  // SIGNSKIP_SPARSE_LINEAR_HPP
