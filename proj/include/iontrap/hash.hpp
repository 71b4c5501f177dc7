#pragma once

// 64-bit FNV-1a content hashing, used to fingerprint geometries and embedded
// resources in run manifests.

#include <cstdint>
#include <string_view>

namespace iontrap {

inline constexpr std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

}  // namespace iontrap
