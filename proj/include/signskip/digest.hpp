#ifndef SIGNSKIP_DIGEST_HPP
#define SIGNSKIP_DIGEST_HPP

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>

namespace signskip {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;

inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = kFnvOffset) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

// Hash over the little-endian byte image of the floats, so checksums printed
// by the CLI are byte-order independent.
inline std::uint64_t fnv1a64_f32(std::span<const float> values,
                                 std::uint64_t h = kFnvOffset) {
  for (float v : values) {
    std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
    unsigned char le[4] = {
        static_cast<unsigned char>(bits & 0xff),
        static_cast<unsigned char>((bits >> 8) & 0xff),
        static_cast<unsigned char>((bits >> 16) & 0xff),
        static_cast<unsigned char>((bits >> 24) & 0xff),
    };
    h = fnv1a64(le, 4, h);
  }
  return h;
}

}  // namespace signskip

#endif  // SIGNSKIP_DIGEST_HPP
