#ifndef SIGNSKIP_RNG_HPP
#define SIGNSKIP_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

namespace signskip {

// All randomness in the project flows through the generators below so that
// a seed reproduces the same bytes on any platform. The algorithms are part
// of the file-format contract (see README): splitmix64 for seeding and
// stream derivation, xoshiro256++ for the raw stream, Box-Muller for
// normals. Never substitute std::mt19937 / std::normal_distribution here;
// their output is implementation-defined.

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Decorrelated sub-seed for stream `stream` of a base seed. Matrix streams
// and input streams use disjoint stream ids (see model_io).
inline std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed;
  std::uint64_t mixed = splitmix64_next(s);
  s = mixed ^ (stream * 0x9E3779B97F4A7C15ull);
  return splitmix64_next(s);
}

class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : state_) w = splitmix64_next(sm);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0,1), 53-bit resolution.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4];
};

// Standard normals via the trigonometric Box-Muller transform, one spare
// value cached between calls.
class GaussianSampler {
 public:
  explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0,1] keeps the log finite.
    double u1 = static_cast<double>((rng_.next() >> 11) + 1) * 0x1.0p-53;
    double u2 = rng_.next_unit();
    double r = std::sqrt(-2.0 * std::log(u1));
    double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  float next_f32(float mean = 0.0f) {
    return static_cast<float>(next()) + mean;
  }

 private:
  Xoshiro256pp rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace signskip

#endif  // SIGNSKIP_RNG_HPP
