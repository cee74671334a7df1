#pragma once

#include <cstdint>

namespace nnts {

namespace detail {

// SplitMix64 finalizer, used for seeding and stream derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl64(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// Collapses two 64-bit values into one seed key.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a;
  std::uint64_t h = detail::splitmix64(s);
  s = h ^ b;
  return detail::splitmix64(s);
}

/// Deterministic, platform-independent random stream (xoshiro256++ seeded
/// via SplitMix64). Identical (master_seed, stream_id) pairs reproduce
/// identical sequences; substreams split without coordination, so work items
/// can be seeded independently of scheduling order.
class RngStream {
 public:
  explicit RngStream(std::uint64_t master_seed, std::uint64_t stream_id = 0)
      : master_(master_seed), stream_(stream_id) {
    std::uint64_t key = mix_seed(master_seed, stream_id);
    for (auto& w : s_) w = detail::splitmix64(key);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl64(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = detail::rotl64(s_[3], 45);
    return result;
  }

  /// Uniform draw on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Child stream addressed by id; independent of draws taken so far.
  RngStream substream(std::uint64_t id) const {
    return RngStream(mix_seed(master_, stream_), id);
  }

  std::uint64_t master_seed() const { return master_; }
  std::uint64_t stream_id() const { return stream_; }

 private:
  std::uint64_t s_[4];
  std::uint64_t master_;
  std::uint64_t stream_;
};

}  // namespace nnts
