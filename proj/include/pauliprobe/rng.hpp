#pragma once

#include <cstdint>

namespace pauliprobe {

// SplitMix64: a counter-based generator (the state advances by a fixed
// increment; each output is a bijective hash of the counter). Chosen over
// the standard-library engines because its entire output sequence is pinned
// down here, so seeded runs are reproducible bit-for-bit on any platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 random mantissa bits.
  double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform double in [-1, 1).
  double symmetric() { return 2.0 * u01() - 1.0; }

  // Uniform integer in [0, bound). Uses the widening-multiply reduction;
  // the modulo bias is below 2^-64 and irrelevant at desk scale.
  std::uint64_t below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

  bool bernoulli(double p) { return u01() < p; }

 private:
  std::uint64_t state_;
};

// Derives an independent stream seed from a base seed and a stream index,
// so that per-trial oracles and generators never share a sequence.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  SplitMix64 mix(base ^ (0xA076'1D64'78BD'642Full * (stream + 1)));
  mix.next();
  return mix.next();
}

}  // namespace pauliprobe
