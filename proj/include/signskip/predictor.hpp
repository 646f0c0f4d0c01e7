#ifndef SIGNSKIP_PREDICTOR_HPP
#define SIGNSKIP_PREDICTOR_HPP

#include <bit>
#include <cstdint>
#include <numeric>
#include <vector>

#include "signskip/signpack.hpp"

namespace signskip {

// Per-output-row skip decisions: 1 = row treated as sparse (skipped).
struct SkipMask {
  std::vector<std::uint8_t> bits;

  SkipMask() = default;
  explicit SkipMask(std::size_t n, bool fill = false)
      : bits(n, fill ? 1 : 0) {}

  std::size_t size() const { return bits.size(); }
  bool test(std::size_t i) const { return bits[i] != 0; }
  void set(std::size_t i, bool v) { bits[i] = v ? 1 : 0; }

  std::size_t count_skipped() const {
    return std::accumulate(bits.begin(), bits.end(), std::size_t{0});
  }

  // Containment: every skipped row here is also skipped in `other`.
  bool subset_of(const SkipMask& other) const {
    if (bits.size() != other.bits.size()) return false;
    for (std::size_t i = 0; i < bits.size(); ++i)
      if (bits[i] && !other.bits[i]) return false;
    return true;
  }

  void merge(const SkipMask& other) {
    for (std::size_t i = 0; i < bits.size(); ++i) bits[i] |= other.bits[i];
  }
};

// Conservativeness coefficient in fixed-point x100 (alpha 1.03 -> 103).
// Values above 100 skip fewer rows; below 100 skip more. The sentinel makes
// the majority test unsatisfiable except at N_pos == 0, where skipping is
// provably sound.
struct AlphaX100 {
  std::uint32_t value = 100;
};

inline constexpr std::uint32_t ALPHA_NEVER_SKIP_BY_MAJORITY = 0xFFFFFFFFu;

struct AlphaSchedule {
  std::vector<AlphaX100> per_layer;
  std::size_t early_layer_count = 0;
};

// N_neg = popcount(signs(W_row) XOR signs(x)): the number of element-wise
// products whose sign disagreement predicts a negative contribution.
// Padding bits are zero on both sides; the last word is masked anyway so a
// corrupted operand cannot inflate the count.
inline std::uint32_t count_negatives(const std::uint32_t* row_words,
                                     const std::uint32_t* x_words,
                                     std::size_t n_words,
                                     std::uint32_t tail_mask) {
  if (n_words == 0) return 0;
  std::uint32_t count = 0;
  for (std::size_t w = 0; w + 1 < n_words; ++w)
    count += std::popcount(row_words[w] ^ x_words[w]);
  count += std::popcount((row_words[n_words - 1] ^ x_words[n_words - 1]) &
                         tail_mask);
  return count;
}

// Majority test: skip iff alpha * N_pos < N_neg, evaluated exactly in 64-bit
// integers as alpha_x100 * N_pos < 100 * N_neg. Ties predict NOT sparse.
// N_pos is derived from the true element count d, never from words * 32.
inline bool predict_row(std::uint32_t n_neg, std::size_t d, AlphaX100 alpha) {
  std::uint64_t n_pos = static_cast<std::uint64_t>(d) - n_neg;
  return static_cast<std::uint64_t>(alpha.value) * n_pos <
         100ull * static_cast<std::uint64_t>(n_neg);
}

// Full mask for one projection matrix. When n_neg_out is non-null it
// receives the per-row N_neg counts (used for trace histograms).
inline SkipMask predict_skip_mask(const SignPackedMatrix& w_signs,
                                  const SignPackedVector& x_signs,
                                  AlphaX100 alpha, unsigned threads = 1,
                                  std::vector<std::uint32_t>* n_neg_out = nullptr) {
  if (w_signs.cols != x_signs.len)
    throw shape_error("predict_skip_mask: W.cols " +
                      std::to_string(w_signs.cols) + " != x.len " +
                      std::to_string(x_signs.len));
  SkipMask mask(w_signs.rows);
  if (n_neg_out) n_neg_out->assign(w_signs.rows, 0);
  const std::uint32_t* xw = x_signs.words.data();
  parallel_for(w_signs.rows, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      std::uint32_t n_neg = count_negatives(w_signs.row(i), xw,
                                            w_signs.words_per_row,
                                            w_signs.tail_mask);
      mask.bits[i] = predict_row(n_neg, w_signs.cols, alpha) ? 1 : 0;
      if (n_neg_out) (*n_neg_out)[i] = n_neg;
    }
  });
  return mask;
}

}  // namespace signskip

#endif  // SIGNSKIP_PREDICTOR_HPP
