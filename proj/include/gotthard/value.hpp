// Fixed 128-byte values and big-endian field helpers shared by the codec,
// the store, and the record layouts.
#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>

namespace gotthard {

inline constexpr std::size_t kValueBytes = 128;

namespace detail {

inline void put_u32_be(std::uint8_t* p, std::uint32_t v) {
  p[0] = static_cast<std::uint8_t>(v >> 24);
  p[1] = static_cast<std::uint8_t>(v >> 16);
  p[2] = static_cast<std::uint8_t>(v >> 8);
  p[3] = static_cast<std::uint8_t>(v);
}

inline std::uint32_t get_u32_be(const std::uint8_t* p) {
  return (static_cast<std::uint32_t>(p[0]) << 24) |
         (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) |
         static_cast<std::uint32_t>(p[3]);
}

inline void put_u64_be(std::uint8_t* p, std::uint64_t v) {
  put_u32_be(p, static_cast<std::uint32_t>(v >> 32));
  put_u32_be(p + 4, static_cast<std::uint32_t>(v));
}

inline std::uint64_t get_u64_be(const std::uint8_t* p) {
  return (static_cast<std::uint64_t>(get_u32_be(p)) << 32) | get_u32_be(p + 4);
}

}  // namespace detail

// Opaque fixed-width value. Comparisons are whole-value byte equality; the
// store never interprets the contents.
struct Value128 {
  std::array<std::uint8_t, kValueBytes> bytes{};

  bool operator==(const Value128&) const = default;

  static Value128 zero() { return Value128{}; }

  // Counter convention used by the microbenchmarks: big-endian u32 in the
  // first four bytes, remaining bytes zero.
  static Value128 of_counter(std::uint32_t n) {
    Value128 v;
    detail::put_u32_be(v.bytes.data(), n);
    return v;
  }

  std::uint32_t counter() const { return detail::get_u32_be(bytes.data()); }

  bool is_zero() const {
    for (auto b : bytes)
      if (b != 0) return false;
    return true;
  }
};

// Counter increment wraps modulo 2^32.
inline Value128 counter_increment(const Value128& v) {
  return Value128::of_counter(v.counter() + 1u);
}

inline std::string to_hex(const Value128& v) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.resize(2 * kValueBytes);
  for (std::size_t i = 0; i < kValueBytes; ++i) {
    out[2 * i] = digits[v.bytes[i] >> 4];
    out[2 * i + 1] = digits[v.bytes[i] & 0xf];
  }
  return out;
}

// Accepts 2*N hex digits for N <= 128; shorter strings fill the value's
// prefix, the rest stays zero.
inline Value128 value_from_hex(const std::string& hex) {
  if (hex.size() % 2 != 0 || hex.size() > 2 * kValueBytes)
    throw std::invalid_argument("value_from_hex: bad length " + std::to_string(hex.size()));
  auto nib = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument(std::string("value_from_hex: bad digit '") + c + "'");
  };
  Value128 v;
  for (std::size_t i = 0; i + 1 < hex.size(); i += 2)
    v.bytes[i / 2] = static_cast<std::uint8_t>((nib(hex[i]) << 4) | nib(hex[i + 1]));
  return v;
}

}  // namespace gotthard
