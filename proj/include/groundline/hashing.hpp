#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace groundline {

// Hex-encoded SHA-256 digest (64 lowercase hex chars).
std::string sha256_hex(std::string_view data);

// Standard base64 (RFC 4648, with padding).
std::string base64_encode(std::string_view data);

// Fast deterministic 64-bit mixer; the workhorse behind the offline
// providers. Same sequence on every platform.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d4a9b9fb3cbbf9ULL;
  return z ^ (z >> 31);
}

// FNV-1a over bytes, convenient for seeding splitmix64 from text.
std::uint64_t fnv1a64(std::string_view data);

// splitmix64 output mapped to [-1, 1).
inline double unit_double(std::uint64_t& state) {
  return static_cast<double>(splitmix64(state) >> 11) * (2.0 / 9007199254740992.0) - 1.0;
}

}  // namespace groundline
