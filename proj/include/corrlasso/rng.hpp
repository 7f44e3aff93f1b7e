#pragma once

#include <cstdint>

namespace corrlasso {

// SplitMix64 used as a counter-based stream: output t is mix(seed + t*gamma),
// so a stream is fully described by its seed and position. Child streams are
// derived from (seed, index) alone, which is what makes sweep trials
// reproducible no matter how work is scheduled across threads.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) : seed_(seed), ctr_(0) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~0ULL; }

  result_type operator()() { return mix(seed_ + (++ctr_) * kGamma); }

  std::uint64_t seed() const { return seed_; }

  // independent stream determined by (seed, index) only
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t index) {
    return mix(seed ^ mix(index + 0x5851f42d4c957f2dULL));
  }
  SplitMix64 split(std::uint64_t index) const {
    return SplitMix64(derive(seed_, index));
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t seed_;
  std::uint64_t ctr_;
};

}  // namespace corrlasso
