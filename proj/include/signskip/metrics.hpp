#ifndef SIGNSKIP_METRICS_HPP
#define SIGNSKIP_METRICS_HPP

#include <cmath>
#include <cstdint>

#include "signskip/predictor.hpp"
#include "signskip/tensor.hpp"

namespace signskip {

// Predictor confusion counts. "Positive" is the sparse (skip) class: a true
// positive is a row predicted sparse that the dense gate confirms sparse.
// Empty denominators score 1.0 so degenerate layers do not poison averages.
struct PredictorScore {
  std::uint64_t true_positive = 0;
  std::uint64_t false_positive = 0;
  std::uint64_t false_negative = 0;
  std::uint64_t true_negative = 0;
  double precision = 1.0;
  double recall = 1.0;
};

inline PredictorScore score_predictor(const SkipMask& predicted,
                                      const SkipMask& truth) {
  if (predicted.size() != truth.size())
    throw shape_error("score_predictor: mask length mismatch");
  PredictorScore s;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    bool p = predicted.bits[i] != 0;
    bool t = truth.bits[i] != 0;
    if (p && t) ++s.true_positive;
    else if (p && !t) ++s.false_positive;
    else if (!p && t) ++s.false_negative;
    else ++s.true_negative;
  }
  std::uint64_t pd = s.true_positive + s.false_positive;
  std::uint64_t td = s.true_positive + s.false_negative;
  s.precision = pd == 0 ? 1.0 : static_cast<double>(s.true_positive) / pd;
  s.recall = td == 0 ? 1.0 : static_cast<double>(s.true_positive) / td;
  return s;
}

// Per-layer operation counts for the three contenders: this predictor
// (bitwise word ops), the dense MLP block, the skip-aware MLP block, and a
// trained low-rank predictor of the given rank (two fp matmuls) as the
// memory/compute comparator.
struct OpCountReport {
  std::uint64_t predictor_word_ops = 0;
  std::uint64_t dense_mlp_macs = 0;
  std::uint64_t sparse_mlp_macs = 0;
  std::uint64_t comparator_predictor_macs = 0;
};

inline OpCountReport op_counts(std::uint64_t d, std::uint64_t k,
                               double sparsity, std::uint64_t rank) {
  if (!(sparsity >= 0.0 && sparsity <= 1.0))
    throw value_error("op_counts: sparsity must be in [0,1]");
  OpCountReport r;
  r.predictor_word_ops = k * ((d + 31) / 32);
  r.dense_mlp_macs = 3 * d * k;
  r.sparse_mlp_macs = static_cast<std::uint64_t>(
      std::llround(static_cast<double>(r.dense_mlp_macs) * (1.0 - sparsity)));
  r.comparator_predictor_macs = d * rank + rank * k;
  return r;
}

struct MemoryReport {
  std::uint64_t bytes = 0;
  double mib = 0.0;
};

// Footprint of the packed sign bits across the model: one u32 word per 32
// gate columns, per row, per layer.
inline MemoryReport signpack_memory(std::uint64_t d, std::uint64_t k,
                                    std::uint64_t layers) {
  if (d == 0 || k == 0 || layers == 0)
    throw value_error("signpack_memory: dimensions must be positive");
  MemoryReport r;
  r.bytes = k * ((d + 31) / 32) * 4 * layers;
  r.mib = static_cast<double>(r.bytes) / (1024.0 * 1024.0);
  return r;
}

// Footprint of a rank-r trained predictor held in fp16 across the model.
inline MemoryReport comparator_memory(std::uint64_t d, std::uint64_t k,
                                      std::uint64_t rank, std::uint64_t layers) {
  if (d == 0 || k == 0 || rank == 0 || layers == 0)
    throw value_error("comparator_memory: dimensions must be positive");
  MemoryReport r;
  r.bytes = (d * rank + rank * k) * 2 * layers;
  r.mib = static_cast<double>(r.bytes) / (1024.0 * 1024.0);
  return r;
}

inline double l2_error(const DenseVector& a, const DenseVector& b) {
  if (a.size() != b.size())
    throw shape_error("l2_error: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double diff = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

}  // namespace signskip

#endif  // SIGNSKIP_METRICS_HPP
