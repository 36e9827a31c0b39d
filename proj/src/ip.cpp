#include "raptor/ip.hpp"

#include "raptor/error.hpp"

#include <charconv>

namespace raptor {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return "PARSE_ERROR";
    case ErrorCode::kIo: return "IO_ERROR";
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kConstantInput: return "CONSTANT_INPUT";
    case ErrorCode::kLengthMismatch: return "LENGTH_MISMATCH";
    case ErrorCode::kEmptyDirection: return "EMPTY_DIRECTION";
    case ErrorCode::kEmptyInput: return "EMPTY_INPUT";
    case ErrorCode::kOutOfOrder: return "OUT_OF_ORDER";
    case ErrorCode::kMissingPath: return "MISSING_PATH";
    case ErrorCode::kEmptyPath: return "EMPTY_PATH";
    case ErrorCode::kNoAdmissibleGuard: return "NO_ADMISSIBLE_GUARD";
    case ErrorCode::kInvalidScenario: return "INVALID_SCENARIO";
  }
  return "UNKNOWN";
}

namespace {

std::uint32_t mask_for(int length) {
  return length == 0 ? 0u : ~std::uint32_t{0} << (32 - length);
}

}  // namespace

std::optional<Ipv4Address> Ipv4Address::parse(std::string_view text) {
  std::uint32_t value = 0;
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (int octet = 0; octet < 4; ++octet) {
    if (octet > 0) {
      if (p == end || *p != '.') return std::nullopt;
      ++p;
    }
    unsigned part = 0;
    auto [next, ec] = std::from_chars(p, end, part);
    if (ec != std::errc{} || next == p || next - p > 3 || part > 255) {
      return std::nullopt;
    }
    value = (value << 8) | part;
    p = next;
  }
  if (p != end) return std::nullopt;
  return Ipv4Address(value);
}

std::string Ipv4Address::to_string() const {
  std::string out;
  out.reserve(15);
  for (int shift = 24; shift >= 0; shift -= 8) {
    out += std::to_string((value_ >> shift) & 0xffu);
    if (shift > 0) out += '.';
  }
  return out;
}

bool Ipv4Address::is_private() const {
  static const IpPrefix kPrivate[] = {
      IpPrefix(Ipv4Address(0x0a000000u), 8),   // 10/8
      IpPrefix(Ipv4Address(0xac100000u), 12),  // 172.16/12
      IpPrefix(Ipv4Address(0xc0a80000u), 16),  // 192.168/16
      IpPrefix(Ipv4Address(0x7f000000u), 8),   // loopback
      IpPrefix(Ipv4Address(0xa9fe0000u), 16),  // link-local
      IpPrefix(Ipv4Address(0x64400000u), 10),  // CGN shared space
  };
  for (const auto& p : kPrivate) {
    if (p.covers(*this)) return true;
  }
  return false;
}

IpPrefix::IpPrefix(Ipv4Address base, int length) : length_(length) {
  if (length < 0 || length > 32) {
    throw Error(ErrorCode::kInvalidArgument,
                "prefix length out of range: " + std::to_string(length));
  }
  base_ = Ipv4Address(base.value() & mask_for(length));
}

std::optional<IpPrefix> IpPrefix::parse(std::string_view text) {
  const auto slash = text.find('/');
  const auto addr = Ipv4Address::parse(text.substr(0, slash));
  if (!addr) return std::nullopt;
  int length = 32;
  if (slash != std::string_view::npos) {
    const auto len_text = text.substr(slash + 1);
    auto [next, ec] =
        std::from_chars(len_text.data(), len_text.data() + len_text.size(), length);
    if (ec != std::errc{} || next != len_text.data() + len_text.size() ||
        len_text.empty() || length < 0 || length > 32) {
      return std::nullopt;
    }
  }
  return IpPrefix(*addr, length);
}

std::uint32_t IpPrefix::netmask() const { return mask_for(length_); }

Ipv4Address IpPrefix::last() const {
  return Ipv4Address(base_.value() | ~netmask());
}

std::string IpPrefix::to_string() const {
  return base_.to_string() + "/" + std::to_string(length_);
}

bool IpPrefix::covers(Ipv4Address addr) const {
  return (addr.value() & netmask()) == base_.value();
}

bool IpPrefix::covers(const IpPrefix& other) const {
  return other.length_ >= length_ && covers(other.base_);
}

bool IpPrefix::overlaps(const IpPrefix& other) const {
  return covers(other) || other.covers(*this);
}

bool is_more_specific_of(const IpPrefix& candidate, const IpPrefix& incumbent) {
  return candidate.length() > incumbent.length() &&
         incumbent.covers(candidate.base());
}

}  // namespace raptor
