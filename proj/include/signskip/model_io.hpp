#ifndef SIGNSKIP_MODEL_IO_HPP
#define SIGNSKIP_MODEL_IO_HPP

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "signskip/mlp_engine.hpp"
#include "signskip/rng.hpp"
#include "signskip/signpack.hpp"

namespace signskip {

// SPMF model file, all values little-endian:
//   "SPMF" | u32 version=1 | u32 layers | u32 d | u32 k | f32 theta
//   then per layer: gate, up, down_t as row-major f32 (k*d each).
// SPSG sign sidecar:
//   "SPSG" | u32 version=1 | u32 layers | u32 d | u32 k
//   then per layer: k * ceil(d/32) packed u32 words (gate sign bits,
//   LSB-first as in signpack.hpp).

inline constexpr std::uint32_t kModelVersion = 1;
inline constexpr std::uint32_t kSignpackVersion = 1;

namespace io_detail {

inline void put_u32le(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline bool get_u32le(std::istream& is, std::uint32_t& v) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) return false;
  v = static_cast<std::uint32_t>(b[0]) |
      (static_cast<std::uint32_t>(b[1]) << 8) |
      (static_cast<std::uint32_t>(b[2]) << 16) |
      (static_cast<std::uint32_t>(b[3]) << 24);
  return true;
}

inline void put_f32le(std::ostream& os, float f) {
  put_u32le(os, std::bit_cast<std::uint32_t>(f));
}

inline bool get_f32le(std::istream& is, float& f) {
  std::uint32_t v;
  if (!get_u32le(is, v)) return false;
  f = std::bit_cast<float>(v);
  return true;
}

// Bulk f32 array, memcpy fast path on little-endian hosts.
inline void put_f32_array(std::ostream& os, const float* data, std::size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(data),
             static_cast<std::streamsize>(n * sizeof(float)));
  } else {
    for (std::size_t i = 0; i < n; ++i) put_f32le(os, data[i]);
  }
}

inline bool get_f32_array(std::istream& is, float* data, std::size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    return static_cast<bool>(is.read(reinterpret_cast<char*>(data),
                                     static_cast<std::streamsize>(n * sizeof(float))));
  } else {
    for (std::size_t i = 0; i < n; ++i)
      if (!get_f32le(is, data[i])) return false;
    return true;
  }
}

inline void put_u32_array(std::ostream& os, const std::uint32_t* data,
                          std::size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(data),
             static_cast<std::streamsize>(n * sizeof(std::uint32_t)));
  } else {
    for (std::size_t i = 0; i < n; ++i) put_u32le(os, data[i]);
  }
}

inline bool get_u32_array(std::istream& is, std::uint32_t* data,
                          std::size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    return static_cast<bool>(is.read(reinterpret_cast<char*>(data),
                                     static_cast<std::streamsize>(n * sizeof(std::uint32_t))));
  } else {
    for (std::size_t i = 0; i < n; ++i)
      if (!get_u32le(is, data[i])) return false;
    return true;
  }
}

inline void expect_magic(std::istream& is, const char expected[4],
                         const std::string& what) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, expected, 4) != 0)
    throw format_error(what + ": bad magic");
}

}  // namespace io_detail

inline void write_model(const std::string& path, const MlpStack& stack) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw format_error("write_model: cannot open " + path);
  os.write("SPMF", 4);
  io_detail::put_u32le(os, kModelVersion);
  io_detail::put_u32le(os, static_cast<std::uint32_t>(stack.layers.size()));
  io_detail::put_u32le(os, static_cast<std::uint32_t>(stack.d));
  io_detail::put_u32le(os, static_cast<std::uint32_t>(stack.k));
  io_detail::put_f32le(os, stack.layers.front().theta.theta);
  for (const auto& layer : stack.layers) {
    io_detail::put_f32_array(os, layer.gate.data.data(), layer.gate.data.size());
    io_detail::put_f32_array(os, layer.up.data.data(), layer.up.data.size());
    io_detail::put_f32_array(os, layer.down_t.data.data(),
                             layer.down_t.data.size());
  }
  if (!os) throw format_error("write_model: write failed for " + path);
}

inline MlpStack read_model(const std::string& path, unsigned threads = 1) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw format_error("read_model: cannot open " + path);
  io_detail::expect_magic(is, "SPMF", "read_model");
  std::uint32_t version, layers, d, k;
  float theta;
  if (!io_detail::get_u32le(is, version) || !io_detail::get_u32le(is, layers) ||
      !io_detail::get_u32le(is, d) || !io_detail::get_u32le(is, k) ||
      !io_detail::get_f32le(is, theta))
    throw format_error("read_model: truncated header");
  if (version != kModelVersion)
    throw format_error("read_model: unsupported version " +
                       std::to_string(version));
  if (layers == 0 || d == 0 || k == 0)
    throw format_error("read_model: non-positive dimensions");

  static const char* kMatrixNames[3] = {"gate", "up", "down_t"};
  std::vector<MlpLayerWeights> result;
  result.reserve(layers);
  for (std::uint32_t l = 0; l < layers; ++l) {
    std::array<DenseMatrix, 3> mats;
    for (int m = 0; m < 3; ++m) {
      mats[m] = DenseMatrix(k, d);
      if (!io_detail::get_f32_array(is, mats[m].data.data(), mats[m].data.size()))
        throw format_error("read_model: truncated at layer " +
                           std::to_string(l) + " matrix " + kMatrixNames[m]);
    }
    // make_layer re-validates finiteness and packs gate signs
    result.push_back(make_layer(std::move(mats[0]), std::move(mats[1]),
                                std::move(mats[2]),
                                ActivationThreshold{theta}, threads));
  }
  return make_stack(std::move(result));
}

inline void write_signpack(const std::string& path, const MlpStack& stack) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw format_error("write_signpack: cannot open " + path);
  os.write("SPSG", 4);
  io_detail::put_u32le(os, kSignpackVersion);
  io_detail::put_u32le(os, static_cast<std::uint32_t>(stack.layers.size()));
  io_detail::put_u32le(os, static_cast<std::uint32_t>(stack.d));
  io_detail::put_u32le(os, static_cast<std::uint32_t>(stack.k));
  for (const auto& layer : stack.layers)
    io_detail::put_u32_array(os, layer.gate_signs.words.data(),
                             layer.gate_signs.words.size());
  if (!os) throw format_error("write_signpack: write failed for " + path);
}

// Reads the sidecar and re-verifies the padding invariant: bits above
// position (d-1) % 32 in the last word of every row must be zero.
inline std::vector<SignPackedMatrix> read_signpack(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw format_error("read_signpack: cannot open " + path);
  io_detail::expect_magic(is, "SPSG", "read_signpack");
  std::uint32_t version, layers, d, k;
  if (!io_detail::get_u32le(is, version) || !io_detail::get_u32le(is, layers) ||
      !io_detail::get_u32le(is, d) || !io_detail::get_u32le(is, k))
    throw format_error("read_signpack: truncated header");
  if (version != kSignpackVersion)
    throw format_error("read_signpack: unsupported version " +
                       std::to_string(version));
  if (layers == 0 || d == 0 || k == 0)
    throw format_error("read_signpack: non-positive dimensions");

  std::vector<SignPackedMatrix> packs(layers);
  for (std::uint32_t l = 0; l < layers; ++l) {
    SignPackedMatrix& p = packs[l];
    p.rows = k;
    p.cols = d;
    p.words_per_row = words_for(d);
    p.tail_mask = tail_mask_for(d);
    p.words.resize(p.rows * p.words_per_row);
    if (!io_detail::get_u32_array(is, p.words.data(), p.words.size()))
      throw format_error("read_signpack: truncated at layer " +
                         std::to_string(l));
    for (std::size_t i = 0; i < p.rows; ++i)
      if ((p.row(i)[p.words_per_row - 1] & ~p.tail_mask) != 0)
        throw format_error("read_signpack: nonzero padding bits in layer " +
                           std::to_string(l) + " row " + std::to_string(i));
  }
  return packs;
}

// Verifies a sidecar against a loaded model and swaps it in. The packed
// signs must match a fresh pack of the gate matrices bit for bit.
inline void attach_signpack(MlpStack& stack,
                            const std::vector<SignPackedMatrix>& packs) {
  if (packs.size() != stack.layers.size())
    throw format_error("attach_signpack: layer count mismatch");
  for (std::size_t l = 0; l < stack.layers.size(); ++l) {
    const SignPackedMatrix& p = packs[l];
    if (p.rows != stack.k || p.cols != stack.d)
      throw format_error("attach_signpack: dimension mismatch at layer " +
                         std::to_string(l));
    if (p.words != stack.layers[l].gate_signs.words)
      throw format_error("attach_signpack: sidecar disagrees with model at "
                         "layer " + std::to_string(l));
    stack.layers[l].gate_signs = p;
  }
}

// ---------------------------------------------------------------------------
// Seeded synthetic generation
// ---------------------------------------------------------------------------

enum class GenMode { iid_gaussian, sparsity_biased };

// sparsity_biased shifts the gate rows to mean -gate_row_shift and the inputs
// to mean +input_mean, skewing gate dots negative; with both around 0.3 and
// d ~ 512 the true gate sparsity lands in the 90%+ regime. The achieved
// sparsity is a measured property of the data, not a promise.
struct GenSpec {
  std::uint32_t layers = 1;
  std::uint32_t d = 0;
  std::uint32_t k = 0;
  std::uint64_t seed = 0;
  GenMode mode = GenMode::iid_gaussian;
  float gate_row_shift = 0.0f;  // mode sparsity_biased only
  float input_mean = 0.0f;      // mode sparsity_biased only
};

inline void validate(const GenSpec& spec) {
  if (spec.layers == 0 || spec.d == 0 || spec.k == 0)
    throw value_error("gen spec: dimensions must be positive");
  if (!(spec.gate_row_shift >= 0.0f))
    throw value_error("gen spec: gate_row_shift must be >= 0 and finite");
  if (!std::isfinite(spec.input_mean))
    throw value_error("gen spec: input_mean must be finite");
  if (spec.mode == GenMode::iid_gaussian &&
      (spec.gate_row_shift != 0.0f || spec.input_mean != 0.0f))
    throw value_error(
        "gen spec: gate_row_shift/input_mean only apply to sparsity_biased");
}

// Stream ids: matrix m of layer l uses 3*l + m (m: 0=gate, 1=up, 2=down_t);
// input vector i uses 2^32 + i. Disjoint by construction for any model that
// fits in memory.
inline constexpr std::uint64_t kInputStreamBase = std::uint64_t{1} << 32;

inline void fill_gaussian(DenseMatrix& m, std::uint64_t stream_seed,
                          float mean = 0.0f) {
  GaussianSampler g(stream_seed);
  for (auto& v : m.data) v = g.next_f32(mean);
}

inline MlpStack gen_synthetic(const GenSpec& spec, float theta = 0.0f) {
  validate(spec);
  float gate_mean =
      spec.mode == GenMode::sparsity_biased ? -spec.gate_row_shift : 0.0f;
  std::vector<MlpLayerWeights> layers;
  layers.reserve(spec.layers);
  for (std::uint32_t l = 0; l < spec.layers; ++l) {
    DenseMatrix gate(spec.k, spec.d), up(spec.k, spec.d), down_t(spec.k, spec.d);
    fill_gaussian(gate, derive_stream_seed(spec.seed, 3ull * l),
                             gate_mean);
    fill_gaussian(up, derive_stream_seed(spec.seed, 3ull * l + 1),
                             0.0f);
    fill_gaussian(down_t, derive_stream_seed(spec.seed, 3ull * l + 2),
                             0.0f);
    layers.push_back(make_layer(std::move(gate), std::move(up),
                                std::move(down_t), ActivationThreshold{theta}));
  }
  return make_stack(std::move(layers));
}

inline std::vector<DenseVector> gen_inputs(const GenSpec& spec,
                                           std::size_t count) {
  validate(spec);
  float mean = spec.mode == GenMode::sparsity_biased ? spec.input_mean : 0.0f;
  std::vector<DenseVector> inputs;
  inputs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    GaussianSampler g(
        derive_stream_seed(spec.seed, kInputStreamBase + i));
    DenseVector x(spec.d);
    for (auto& v : x.data) v = g.next_f32(mean);
    inputs.push_back(std::move(x));
  }
  return inputs;
}

}  // namespace signskip

#endif  // SIGNSKIP_MODEL_IO_HPP
