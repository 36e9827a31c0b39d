#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace raptor {

/// An IPv4 address held in host byte order.
class Ipv4Address {
 public:
  constexpr Ipv4Address() = default;
  constexpr explicit Ipv4Address(std::uint32_t value) : value_(value) {}

  /// Parses dotted-quad notation. Returns nullopt on malformed input.
  static std::optional<Ipv4Address> parse(std::string_view text);

  [[nodiscard]] constexpr std::uint32_t value() const { return value_; }
  [[nodiscard]] std::string to_string() const;

  /// RFC 1918, loopback, link-local and shared address space.
  [[nodiscard]] bool is_private() const;

  constexpr auto operator<=>(const Ipv4Address&) const = default;

 private:
  std::uint32_t value_ = 0;
};

/// An IPv4 prefix. Construction always clears the host bits, so every
/// instance satisfies the normalization invariant.
class IpPrefix {
 public:
  constexpr IpPrefix() = default;
  IpPrefix(Ipv4Address base, int length);

  /// Parses `a.b.c.d/len`. A bare address parses as a /32. Host bits set
  /// in the input are cleared.
  static std::optional<IpPrefix> parse(std::string_view text);

  [[nodiscard]] constexpr Ipv4Address base() const { return base_; }
  [[nodiscard]] constexpr int length() const { return length_; }
  [[nodiscard]] std::uint32_t netmask() const;
  /// Last address inside the prefix.
  [[nodiscard]] Ipv4Address last() const;
  [[nodiscard]] std::string to_string() const;

  [[nodiscard]] bool covers(Ipv4Address addr) const;
  /// True iff every address of `other` lies inside this prefix.
  [[nodiscard]] bool covers(const IpPrefix& other) const;
  [[nodiscard]] bool overlaps(const IpPrefix& other) const;

  /// Returns the same prefix; kept so callers can state intent when
  /// handling prefixes from untrusted sources.
  [[nodiscard]] IpPrefix normalized() const { return IpPrefix(base_, length_); }

  constexpr auto operator<=>(const IpPrefix&) const = default;

 private:
  Ipv4Address base_{};
  int length_ = 0;
};

inline bool prefix_covers(const IpPrefix& p, Ipv4Address addr) {
  return p.covers(addr);
}

/// True iff `incumbent` covers `candidate` and `candidate` is strictly longer:
/// announcing `candidate` diverts traffic away from `incumbent`.
bool is_more_specific_of(const IpPrefix& candidate, const IpPrefix& incumbent);

}  // namespace raptor

template <>
struct std::hash<raptor::IpPrefix> {
  std::size_t operator()(const raptor::IpPrefix& p) const noexcept {
    return std::hash<std::uint64_t>{}((std::uint64_t{p.base().value()} << 6) |
                                      static_cast<std::uint64_t>(p.length()));
  }
};
