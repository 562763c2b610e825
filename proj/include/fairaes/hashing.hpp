#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace fairaes {

inline constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

// 64-bit FNV-1a. `state` lets callers chain several byte ranges.
constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state = kFnvOffsetBasis) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= kFnvPrime;
  }
  return state;
}

std::uint64_t fnv1a64_bytes(std::span<const std::byte> bytes,
                            std::uint64_t state = kFnvOffsetBasis);

// Checksum of the exact bit patterns of a double array.
std::uint64_t checksum(std::span<const double> values);

}  // namespace fairaes
