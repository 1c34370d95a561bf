#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace mgtd {

/// 64-bit FNV-1a. Used for feature hashing and configuration fingerprints.
class Fnv1a64 {
 public:
  static constexpr std::uint64_t kOffset = 0xCBF29CE484222325ULL;
  static constexpr std::uint64_t kPrime = 0x100000001B3ULL;

  constexpr Fnv1a64& update(std::string_view bytes) noexcept {
    for (unsigned char c : bytes) byte(c);
    return *this;
  }
  constexpr Fnv1a64& byte(unsigned char c) noexcept {
    state_ = (state_ ^ c) * kPrime;
    return *this;
  }
  constexpr std::uint64_t value() const noexcept { return state_; }

 private:
  std::uint64_t state_ = kOffset;
};

constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  return Fnv1a64{}.update(bytes).value();
}

/// Lowercase 16-digit hex.
std::string hex64(std::uint64_t v);

}  // namespace mgtd
