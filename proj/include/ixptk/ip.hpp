#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ixptk {

// Addresses are IPv4 only, kept in host byte order so prefix arithmetic is
// plain integer math.
using Addr = std::uint32_t;

inline constexpr std::uint32_t prefix_mask(int length) {
  return length == 0 ? 0u : ~std::uint32_t{0} << (32 - length);
}

inline std::optional<Addr> parse_ipv4(std::string_view text) {
  Addr out = 0;
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (int octet = 0; octet < 4; ++octet) {
    unsigned value = 0;
    auto [next, ec] = std::from_chars(p, end, value);
    if (ec != std::errc{} || next == p || next - p > 3 || value > 255)
      return std::nullopt;
    out = (out << 8) | value;
    p = next;
    if (octet < 3) {
      if (p == end || *p != '.') return std::nullopt;
      ++p;
    }
  }
  if (p != end) return std::nullopt;
  return out;
}

inline std::string format_ipv4(Addr addr) {
  char buf[16];
  int n = std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", (addr >> 24) & 0xff,
                        (addr >> 16) & 0xff, (addr >> 8) & 0xff, addr & 0xff);
  return std::string(buf, static_cast<size_t>(n));
}

// A CIDR prefix. Invariant: length in [0,32] and no host bits set in base.
struct IpPrefix {
  Addr base = 0;
  int length = 0;

  bool contains(Addr addr) const { return (addr & prefix_mask(length)) == base; }
  bool contains(const IpPrefix& other) const {
    return other.length >= length && contains(other.base);
  }
  Addr first() const { return base; }
  Addr last() const { return base | ~prefix_mask(length); }
  std::uint64_t address_count() const { return std::uint64_t{1} << (32 - length); }

  auto operator<=>(const IpPrefix&) const = default;
};

// Parses "a.b.c.d/len". Nonzero host bits are an error, not silently cleared.
inline IpPrefix parse_prefix(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos)
    throw std::runtime_error("bad prefix '" + std::string(text) + "': missing '/'");
  auto addr = parse_ipv4(text.substr(0, slash));
  if (!addr)
    throw std::runtime_error("bad prefix '" + std::string(text) + "': malformed address");
  int length = -1;
  auto len_text = text.substr(slash + 1);
  auto [next, ec] =
      std::from_chars(len_text.data(), len_text.data() + len_text.size(), length);
  if (ec != std::errc{} || next != len_text.data() + len_text.size())
    throw std::runtime_error("bad prefix '" + std::string(text) + "': malformed length");
  if (length < 0 || length > 32)
    throw std::runtime_error("bad prefix '" + std::string(text) +
                             "': length out of range [0,32]");
  if ((*addr & ~prefix_mask(length)) != 0)
    throw std::runtime_error("bad prefix '" + std::string(text) +
                             "': nonzero host bits");
  return IpPrefix{*addr, length};
}

inline std::string format_prefix(const IpPrefix& prefix) {
  return format_ipv4(prefix.base) + "/" + std::to_string(prefix.length);
}

}  // namespace ixptk
