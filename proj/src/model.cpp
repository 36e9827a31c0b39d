#include "raptor/model.hpp"

#include <algorithm>
#include <charconv>

namespace raptor {

AsPath::AsPath(std::vector<Asn> ases) {
  ases_.reserve(ases.size());
  for (Asn asn : ases) {
    if (std::find(ases_.begin(), ases_.end(), asn) == ases_.end()) {
      ases_.push_back(asn);
    }
  }
}

std::optional<AsPath> AsPath::parse(std::string_view text) {
  std::vector<Asn> ases;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (text[pos] == ' ' || text[pos] == '\t') {
      ++pos;
      continue;
    }
    Asn asn = 0;
    auto [next, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), asn);
    if (ec != std::errc{}) return std::nullopt;
    pos = static_cast<std::size_t>(next - text.data());
    if (pos < text.size() && text[pos] != ' ' && text[pos] != '\t') return std::nullopt;
    ases.push_back(asn);
  }
  return AsPath(std::move(ases));
}

std::optional<Asn> AsPath::origin() const {
  if (ases_.empty()) return std::nullopt;
  return ases_.back();
}

bool AsPath::contains(Asn asn) const {
  return std::find(ases_.begin(), ases_.end(), asn) != ases_.end();
}

std::string AsPath::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < ases_.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(ases_[i]);
  }
  return out;
}

std::string_view to_string(RelayRole role) {
  switch (role) {
    case RelayRole::kGuard: return "GUARD";
    case RelayRole::kExit: return "EXIT";
    case RelayRole::kBoth: return "BOTH";
  }
  return "?";
}

RelayIndex::RelayIndex(std::vector<RelayDescriptor> relays) {
  relays.erase(std::remove_if(relays.begin(), relays.end(),
                              [](const RelayDescriptor& r) { return !r.admitted(); }),
               relays.end());
  std::stable_sort(relays.begin(), relays.end(),
                   [](const RelayDescriptor& a, const RelayDescriptor& b) {
                     return a.address < b.address;
                   });
  relays_ = std::move(relays);
}

std::span<const RelayDescriptor> RelayIndex::within(const IpPrefix& prefix) const {
  const auto lo = std::lower_bound(
      relays_.begin(), relays_.end(), prefix.base(),
      [](const RelayDescriptor& r, Ipv4Address a) { return r.address < a; });
  const auto hi = std::upper_bound(
      lo, relays_.end(), prefix.last(),
      [](Ipv4Address a, const RelayDescriptor& r) { return a < r.address; });
  return {lo, hi};
}

std::optional<RelayRole> RelayIndex::role_within(const IpPrefix& prefix) const {
  bool guard = false;
  bool exit = false;
  for (const auto& r : within(prefix)) {
    guard |= r.is_guard;
    exit |= r.is_exit;
  }
  if (guard && exit) return RelayRole::kBoth;
  if (guard) return RelayRole::kGuard;
  if (exit) return RelayRole::kExit;
  return std::nullopt;
}

namespace {

std::vector<Ipv4Address> distinct_addresses(const std::vector<RelayDescriptor>& relays,
                                            bool RelayDescriptor::*flag) {
  std::vector<Ipv4Address> out;
  for (const auto& r : relays) {
    if (r.*flag && (out.empty() || out.back() != r.address)) out.push_back(r.address);
  }
  return out;
}

}  // namespace

std::vector<Ipv4Address> RelayIndex::guard_addresses() const {
  return distinct_addresses(relays_, &RelayDescriptor::is_guard);
}

std::vector<Ipv4Address> RelayIndex::exit_addresses() const {
  return distinct_addresses(relays_, &RelayDescriptor::is_exit);
}

}  // namespace raptor
