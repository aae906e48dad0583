#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

namespace specbench {

// Incremental FNV-1a (64-bit).  Used for graph hashes, config hashes and for
// deriving independent RNG streams from a base seed.  All multi-byte values
// are fed in little-endian order so digests do not depend on host endianness.
class Fnv1a {
 public:
  Fnv1a& bytes(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      hash_ ^= static_cast<std::uint64_t>(p[i]);
      hash_ *= 1099511628211ULL;
    }
    return *this;
  }

  Fnv1a& u64(std::uint64_t value) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(value >> (8 * i));
    return bytes(buf, 8);
  }

  Fnv1a& i64(std::int64_t value) { return u64(static_cast<std::uint64_t>(value)); }

  Fnv1a& f64(double value) { return u64(std::bit_cast<std::uint64_t>(value)); }

  // Length-prefixed so that ("ab","c") and ("a","bc") hash differently.
  Fnv1a& str(std::string_view value) {
    u64(value.size());
    return bytes(value.data(), value.size());
  }

  std::uint64_t digest() const { return hash_; }

 private:
  std::uint64_t hash_ = 1469598103934665603ULL;
};

// Derives a child seed from a base seed and a tag.  Chaining calls gives a
// tree of independent, reproducible streams (per dataset, per bin, per run).
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
  return Fnv1a().u64(base).u64(salt).digest();
}

inline std::uint64_t mix_seed(std::uint64_t base, std::string_view tag) {
  return Fnv1a().u64(base).str(tag).digest();
}

inline std::string hash_hex(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xF];
    value >>= 4;
  }
  return out;
}

}  // namespace specbench
