#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

namespace mgtd {

/// SplitMix64 (Steele, Lea & Flood 2014). Every random decision in the toolkit
/// goes through this generator so results are identical on every platform.
///
/// Protocol: one `uniform()` draw per candidate site, sites visited in order;
/// a site that fires may consume further draws for its own choices.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform in [0, n); n must be positive.
  std::size_t below(std::size_t n) noexcept {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n));
  }

 private:
  std::uint64_t state_;
};

/// Finalizer of SplitMix64, usable as a stateless 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Independent stream seed for item `index` of a job seeded with `seed`.
/// `salt` separates unrelated consumers of the same seed.
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index,
                                    std::uint64_t salt = 0) noexcept {
  return mix64(mix64(seed ^ (salt * 0xD6E8FEB86659FD93ULL)) + index);
}

/// Fisher-Yates, drawing from `rng` back to front.
template <typename T>
void shuffle(std::span<T> items, SplitMix64& rng) noexcept {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = rng.below(i);
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace mgtd
