#pragma once

#include "raptor/ip.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace raptor {

using Asn = std::uint32_t;
/// BGP timestamps, seconds since the epoch.
using Timestamp = std::int64_t;

/// AS-level route, origin last. Repeated ASes (prepending) are collapsed to
/// their first occurrence, so the path has set semantics.
class AsPath {
 public:
  AsPath() = default;
  explicit AsPath(std::vector<Asn> ases);

  /// Parses a space-separated AS list, e.g. "3356 16276".
  static std::optional<AsPath> parse(std::string_view text);

  [[nodiscard]] const std::vector<Asn>& ases() const { return ases_; }
  [[nodiscard]] bool empty() const { return ases_.empty(); }
  [[nodiscard]] std::size_t size() const { return ases_.size(); }
  [[nodiscard]] std::optional<Asn> origin() const;
  [[nodiscard]] bool contains(Asn asn) const;
  [[nodiscard]] std::string to_string() const;

  auto operator<=>(const AsPath&) const = default;

 private:
  std::vector<Asn> ases_;
};

enum class RelayRole { kGuard, kExit, kBoth };

std::string_view to_string(RelayRole role);

struct RelayDescriptor {
  Ipv4Address address;
  bool is_guard = false;
  bool is_exit = false;
  double bandwidth = 0.0;
  std::string nickname;

  /// Only guard or exit relays take part in circuit analyses.
  [[nodiscard]] bool admitted() const { return is_guard || is_exit; }
};

/// One interval during which a session forwarded a tracked prefix along a
/// fixed AS path. `t_end` is nullopt while the entry is still in use.
struct RouteEntry {
  Timestamp t_start = 0;
  std::optional<Timestamp> t_end;
  IpPrefix prefix;
  RelayRole relay_role = RelayRole::kGuard;
  AsPath path;

  [[nodiscard]] bool open() const { return !t_end.has_value(); }
  [[nodiscard]] bool live_at(Timestamp t) const {
    return t >= t_start && (!t_end || t < *t_end);
  }

  bool operator==(const RouteEntry&) const = default;
};

struct VantageSession {
  std::string session_id;
  Asn local_as = 0;
};

/// Address-sorted index over admitted relays (guard or exit flagged).
class RelayIndex {
 public:
  RelayIndex() = default;
  explicit RelayIndex(std::vector<RelayDescriptor> relays);

  [[nodiscard]] std::span<const RelayDescriptor> all() const { return relays_; }
  /// Relays whose address lies inside `prefix`, in address order.
  [[nodiscard]] std::span<const RelayDescriptor> within(const IpPrefix& prefix) const;
  [[nodiscard]] bool any_within(const IpPrefix& prefix) const {
    return !within(prefix).empty();
  }
  /// Role summary of the relays inside `prefix`; nullopt when none.
  [[nodiscard]] std::optional<RelayRole> role_within(const IpPrefix& prefix) const;

  [[nodiscard]] std::vector<Ipv4Address> guard_addresses() const;
  [[nodiscard]] std::vector<Ipv4Address> exit_addresses() const;
  [[nodiscard]] std::size_t size() const { return relays_.size(); }

 private:
  std::vector<RelayDescriptor> relays_;
};

}  // namespace raptor
