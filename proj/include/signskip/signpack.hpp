#ifndef SIGNSKIP_SIGNPACK_HPP
#define SIGNSKIP_SIGNPACK_HPP

#include <bit>
#include <cstdint>
#include <vector>

#include "signskip/tensor.hpp"

namespace signskip {

// IEEE-754 sign bits packed 32 per word, LSB first: element j lands in bit
// (j % 32) of word (j / 32). -0.0 packs as 1 (counted negative), +0.0 as 0.
// Bit order is fixed here and in the SPSG sidecar format; any order would do
// for popcounting but interchange needs one pinned.

inline std::uint32_t sign_bit(float v) {
  return std::bit_cast<std::uint32_t>(v) >> 31;
}

inline std::size_t words_for(std::size_t d) { return (d + 31) / 32; }

// Low ((d-1) % 32) + 1 bits set; 0xFFFFFFFF when d % 32 == 0.
inline std::uint32_t tail_mask_for(std::size_t d) {
  std::size_t rem = d % 32;
  return rem == 0 ? 0xFFFFFFFFu
                  : (std::uint32_t{1} << rem) - 1u;
}

struct SignPackedMatrix {
  std::vector<std::uint32_t> words;  // rows * words_per_row, padding bits 0
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t words_per_row = 0;
  std::uint32_t tail_mask = 0xFFFFFFFFu;

  const std::uint32_t* row(std::size_t i) const {
    return words.data() + i * words_per_row;
  }
};

struct SignPackedVector {
  std::vector<std::uint32_t> words;
  std::size_t len = 0;
  std::uint32_t tail_mask = 0xFFFFFFFFu;
};

namespace detail {

inline void pack_row(const float* src, std::size_t d, std::uint32_t* dst) {
  std::size_t wpr = words_for(d);
  for (std::size_t w = 0; w < wpr; ++w) dst[w] = 0;
  for (std::size_t j = 0; j < d; ++j)
    dst[j / 32] |= sign_bit(src[j]) << (j % 32);
}

}  // namespace detail

// One-time pack of a weight matrix, done at model load.
inline SignPackedMatrix pack_signs_matrix(const DenseMatrix& W,
                                          unsigned threads = 1) {
  check_finite(W, "pack_signs_matrix");
  SignPackedMatrix out;
  out.rows = W.rows;
  out.cols = W.cols;
  out.words_per_row = words_for(W.cols);
  out.tail_mask = tail_mask_for(W.cols);
  out.words.resize(out.rows * out.words_per_row);
  parallel_for(W.rows, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      detail::pack_row(W.row(i), W.cols, out.words.data() + i * out.words_per_row);
  });
  return out;
}

// Per-token pack of the input vector.
inline SignPackedVector pack_signs_vector(const DenseVector& x) {
  check_finite(x, "pack_signs_vector");
  SignPackedVector out;
  out.len = x.size();
  out.tail_mask = tail_mask_for(x.size());
  out.words.resize(words_for(x.size()));
  detail::pack_row(x.data.data(), x.size(), out.words.data());
  return out;
}

}  // namespace signskip

#endif  // SIGNSKIP_SIGNPACK_HPP
