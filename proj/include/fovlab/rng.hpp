#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace fovlab {

namespace detail {

constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += golden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Counter-based random stream. The output sequence is a pure function of
/// (seed, stream_id): word k is splitmix64(key + k * golden) with the key
/// mixed from both identifiers. Single owner; derive children with split().
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_(stream_id),
        key_(detail::splitmix64(seed ^ detail::splitmix64(stream_id ^ 0x6A09E667F3BCC909ULL))) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64() { return detail::splitmix64(key_ + (counter_++) * detail::golden); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  bool coin() { return (next_u64() >> 63) != 0; }

  /// Independent child stream; does not advance this stream.
  RngStream split(std::uint64_t tag) const {
    return RngStream(detail::splitmix64(key_ ^ detail::splitmix64(tag + 0x3C6EF372FE94F82BULL)),
                     tag);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fovlab
