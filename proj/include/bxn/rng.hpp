#pragma once

#include <cmath>
#include <cstdint>

namespace bxn {

namespace detail {

// splitmix64 finalizer; full-avalanche 64-bit mixer.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl64(std::uint64_t v, int s) {
  return (v << s) | (v >> (64 - s));
}

}  // namespace detail

/// Derives a child stream id from a parent id and a child index. Used to
/// build the per-(replicate, subtrial, arm) and per-(replicate, model,
/// chain) substreams deterministically, independent of scheduling.
inline std::uint64_t substream_id(std::uint64_t parent, std::uint64_t child) {
  return detail::mix64(parent ^ (detail::mix64(child) + 0x9e3779b97f4a7c15ULL +
                                 (parent << 6) + (parent >> 2)));
}

/// Counter-seeded xoshiro256++ stream. Any (seed, stream_id) pair yields a
/// reproducible sequence; distinct pairs yield statistically independent
/// streams, so parallel code can hand out streams by index without
/// coordination. No global state.
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}

  RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
    std::uint64_t key =
        detail::mix64(seed) ^ detail::mix64(detail::mix64(stream_id) + 0x3c6ef372fe94f82bULL);
    for (auto& w : s_) {
      key += 0x9e3779b97f4a7c15ULL;
      w = detail::mix64(key);
    }
    // all-zero state is the one forbidden xoshiro state
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 0x1ULL;
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

  /// Uniform on [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (lo, hi).
  double next_uniform(double lo, double hi) {
    double u;
    do {
      u = next_double();
    } while (u == 0.0);
    return lo + u * (hi - lo);
  }

  /// Standard normal via Marsaglia's polar method (second deviate cached).
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * next_double() - 1.0;
      v = 2.0 * next_double() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  /// Integer uniform on {0, ..., n-1} (unbiased, rejection on the tail).
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  /// Identity of this stream; lets consumers derive child substreams via
  /// substream_id without threading (seed, id) pairs separately.
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Fresh stream for child index i of this stream's identity.
  RngStream child(std::uint64_t i) const { return {seed_, substream_id(stream_id_, i)}; }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace bxn
