#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace ixptk {

// FNV-1a, used for content digests (batch checksums, run manifests). Not a
// cryptographic hash; it only guards against corruption and mixed-up inputs.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ull) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex_digest(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf, 16);
}

inline std::string fnv1a_hex(std::string_view bytes) { return hex_digest(fnv1a(bytes)); }

// splitmix64, for deriving independent deterministic seeds from a base seed.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace ixptk
