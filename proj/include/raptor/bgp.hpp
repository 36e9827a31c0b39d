#pragma once

#include "raptor/model.hpp"
#include "raptor/prefix_table.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace raptor::bgp {

enum class UpdateKind { kAnnounce, kWithdraw };

struct BgpUpdate {
  Timestamp timestamp = 0;
  std::string session;
  UpdateKind kind = UpdateKind::kAnnounce;
  IpPrefix prefix;
  AsPath path;  // empty for withdrawals

  bool operator==(const BgpUpdate&) const = default;
};

struct ParseDiagnostic {
  std::size_t line = 0;
  std::string message;
  std::string text;
};

struct ParsedUpdates {
  std::vector<BgpUpdate> updates;
  std::vector<ParseDiagnostic> diagnostics;
};

/// Reads `timestamp,session,kind,prefix,path` CSV (kind A or W, path a
/// quoted space-separated AS list). Malformed lines become diagnostics; the
/// result is stably sorted by timestamp.
ParsedUpdates parse_updates(std::istream& in);
ParsedUpdates parse_updates(const std::filesystem::path& path);
void write_updates(std::ostream& out, std::span<const BgpUpdate> updates);

struct ResetFilterOptions {
  Timestamp quiet_gap = 3600;
  Timestamp burst_window = 600;
  /// A post-gap window counts as a reset burst when the identical
  /// re-announcements in it reach this fraction of the pre-gap table.
  double burst_fraction = 0.5;
};

/// Drops the table re-dump that follows a session reset: after a silence of
/// at least `quiet_gap` on a session, announcements inside the burst window
/// that repeat a (prefix, path) live before the gap are removed, provided
/// enough of them arrive to look like a table transfer.
std::vector<BgpUpdate> filter_session_resets(std::span<const BgpUpdate> updates,
                                             const ResetFilterOptions& options = {});

/// Routing state of one session restricted to prefixes covering at least
/// one relay: the live table of open entries plus the closed history.
class SessionRib {
 public:
  SessionRib() = default;
  explicit SessionRib(VantageSession session) : session_(std::move(session)) {}

  [[nodiscard]] const VantageSession& session() const { return session_; }

  /// Applies one update. Identical-path re-announcements are no-ops,
  /// prefixes covering no relay are ignored, and an update older than the
  /// last applied one throws kOutOfOrder.
  void apply(const BgpUpdate& update, const RelayIndex& tor_index);

  /// Longest tracked prefix covering `relay` whose entry is live at `t`.
  [[nodiscard]] std::optional<RouteEntry> route_for_relay(Ipv4Address relay, Timestamp t) const;

  [[nodiscard]] const PrefixTable<RouteEntry>& live() const { return live_; }
  [[nodiscard]] const std::map<IpPrefix, std::vector<RouteEntry>>& history() const {
    return history_;
  }
  /// Closed entries followed by the open one, in time order.
  [[nodiscard]] std::vector<RouteEntry> timeline(const IpPrefix& prefix) const;
  [[nodiscard]] std::vector<IpPrefix> tracked_prefixes() const;
  [[nodiscard]] std::optional<Timestamp> last_applied() const { return last_applied_; }

  /// Every entry, closed ones clipped as recorded and open ones as-is.
  [[nodiscard]] std::vector<RouteEntry> entries() const;

  bool operator==(const SessionRib& other) const;

 private:
  void close(const IpPrefix& prefix, Timestamp at);

  VantageSession session_;
  PrefixTable<RouteEntry> live_;
  std::map<IpPrefix, std::vector<RouteEntry>> history_;
  std::optional<Timestamp> last_applied_;
};

/// Local AS of each session: explicit entries win, otherwise the first AS
/// of the session's first announced path.
std::map<std::string, Asn> resolve_local_as(std::span<const BgpUpdate> updates,
                                            const std::map<std::string, Asn>& explicit_map = {});

/// `session,local_as` CSV.
std::map<std::string, Asn> read_sessions(const std::filesystem::path& path);

/// Replays a whole stream into one rib per session.
std::map<std::string, SessionRib> ingest(std::span<const BgpUpdate> updates,
                                         const RelayIndex& tor_index,
                                         const std::map<std::string, Asn>& local_as = {});

}  // namespace raptor::bgp
