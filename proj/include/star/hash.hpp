#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

namespace star {

using Sha256Digest = std::array<uint8_t, 32>;

Sha256Digest sha256(std::span<const uint8_t> data);
Sha256Digest sha256(const std::string& data);

std::string to_hex(const Sha256Digest& digest);

// 64-bit FNV-1a over raw bytes. This is the feature-hashing primitive: the
// constants and byte order below are part of the on-disk corpus contract and
// must never change.
//   offset basis 14695981039346656037, prime 1099511628211, bytes in order.
inline uint64_t fnv1a64(const char* data, size_t len) {
  uint64_t h = 14695981039346656037ull;
  for (size_t i = 0; i < len; ++i) {
    h ^= uint64_t(uint8_t(data[i]));
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace star
