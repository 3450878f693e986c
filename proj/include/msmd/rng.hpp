#pragma once

#include <cstdint>
#include <limits>

namespace msmd {

// SplitMix64. Small state, so one generator per sample index is cheap; this
// is what makes sampling a pure function of (seed, index).
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  SplitMix64 g(a ^ (b * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
  g();
  return g();
}

// Stream tags keep the per-purpose generators of one replicate disjoint.
enum class SeedTag : std::uint64_t {
  kTask = 1,
  kStream = 2,
  kRisk = 3,
  kProbes = 4,
  kPrior = 5,
  kGradient = 6,
};

inline std::uint64_t derive_seed(std::uint64_t seed, SeedTag tag) {
  return mix_seed(seed, static_cast<std::uint64_t>(tag));
}

}  // namespace msmd
