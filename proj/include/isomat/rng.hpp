#pragma once

#include <cmath>
#include <cstdint>

// Deterministic per-replicate noise streams. A stream is keyed by
// (seed, size_index, replicate); the key is absorbed into a splitmix64 state
// and successive outputs are splitmix64 steps. Standard normals come from
// Box-Muller on two uniforms, so the numbers depend only on the key, never
// on scheduling. The transform identifier below is recorded in results
// metadata.

namespace isomat {

inline constexpr const char* kRngTransformId = "splitmix64_boxmuller_v1";

class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t size_index, std::uint64_t replicate) {
    state_ = seed;
    state_ = mix(state_ + 0x9E3779B97F4A7C15ULL * (size_index + 1));
    state_ = mix(state_ + 0xD1B54A32D192ED03ULL * (replicate + 1));
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  // Uniform on the open interval (0, 1).
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; generates pairs, caches the second.
  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace isomat
