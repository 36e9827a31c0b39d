#pragma once

#include "raptor/bgp.hpp"
#include "raptor/model.hpp"
#include "raptor/prefix_table.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace raptor::hijack {

enum class Heuristic { kFrequency, kTime, kMoreSpecific };

std::string_view to_string(Heuristic h);
std::optional<Heuristic> parse_heuristic(std::string_view text);

struct Interval {
  Timestamp start = 0;
  Timestamp end = 0;
  auto operator<=>(const Interval&) const = default;
};

/// Sorted, merged copy of `spans`; empty spans are dropped.
std::vector<Interval> merge_intervals(std::vector<Interval> spans);

struct HijackAlert {
  IpPrefix prefix;
  Asn origin = 0;
  Heuristic heuristic = Heuristic::kTime;
  /// Frequency: share of announcements. Time: live share of the window.
  /// More-specific: number of sessions that carried the announcement.
  double score = 0.0;
  /// Overall [start, end) and the merged live intervals inside it.
  Interval window;
  std::vector<Interval> intervals;
  std::vector<Ipv4Address> affected_guards;
  std::vector<Ipv4Address> affected_exits;
  /// More-specific alerts: the covering prefix and its origin.
  std::optional<IpPrefix> incumbent;
  std::optional<Asn> incumbent_origin;
};

void write_alerts(std::ostream& out, std::span<const HijackAlert> alerts);

struct ConcentrationRow {
  Asn asn = 0;
  std::size_t relays = 0;
  double percent_relays = 0.0;
  double percent_bandwidth = 0.0;
  std::size_t prefix_count = 0;
};

struct ConcentrationReport {
  /// Highest relay share first.
  std::vector<ConcentrationRow> rows;
  std::vector<Ipv4Address> uncovered;
  std::size_t covered_relays = 0;
  double covered_bandwidth = 0.0;

  /// Column sums over the first `top` rows.
  [[nodiscard]] ConcentrationRow cumulative(std::size_t top) const;
};

/// Groups relays by the origin AS of their most-specific covering prefix.
/// Relays without a covering prefix are listed separately and left out of
/// every percentage.
ConcentrationReport concentration(const RelayIndex& relays, const PrefixTable<Asn>& origin_map);

void write_concentration(std::ostream& out, const ConcentrationReport& report);

struct HijackEvent {
  std::string label;
  std::vector<IpPrefix> prefixes;
  Interval window;
};

/// `prefix,t_start,t_end,label` CSV; rows sharing a label form one event.
std::vector<HijackEvent> read_events(const std::filesystem::path& path);
std::vector<HijackEvent> read_events(std::istream& in);
void write_events(std::ostream& out, std::span<const HijackEvent> events);

struct CrossReferenceRow {
  std::string label;
  std::size_t prefixes = 0;
  /// Event prefixes that cover at least one relay.
  std::size_t relay_prefixes = 0;
  std::size_t relays = 0;
  std::size_t guards = 0;
  std::size_t exits = 0;
};

/// A relay is affected by an event when any of its prefixes covers the
/// relay address. Each relay counts once per event; relays flagged as both
/// guard and exit count in both columns.
std::vector<CrossReferenceRow> cross_reference(std::span<const HijackEvent> events,
                                               const RelayIndex& relays);

void write_cross_reference(std::ostream& out, std::span<const CrossReferenceRow> rows,
                           std::size_t total_relays, std::size_t total_guards,
                           std::size_t total_exits);

struct DetectionWindow {
  Timestamp start = 0;
  Timestamp end = 0;
  [[nodiscard]] Timestamp length() const { return end - start; }
};

/// Smallest window holding every update: [first, last + 1).
DetectionWindow span_of(std::span<const bgp::BgpUpdate> updates);

struct FrequencyOptions {
  double threshold = 1e-5;
  /// Divide by all Tor-relevant announcements instead of the prefix's own.
  bool global_denominator = false;
};

/// Flags (prefix, origin) combinations whose share of the prefix's
/// announcements inside the window is strictly below the threshold.
std::vector<HijackAlert> frequency_heuristic(std::span<const bgp::BgpUpdate> updates,
                                             const RelayIndex& relays, DetectionWindow window,
                                             const FrequencyOptions& options = {});

/// Flags (prefix, origin) combinations owning at least one route
/// (prefix, origin, path) whose live time, united over sessions, is a share
/// of the window strictly below the threshold. The score is the smallest
/// such share.
std::vector<HijackAlert> time_heuristic(std::span<const bgp::BgpUpdate> updates,
                                        const RelayIndex& relays, DetectionWindow window,
                                        double threshold = 0.01);

/// Flags announcements strictly more specific than a prefix the same
/// session carries live with a different origin, when the announced prefix
/// holds a relay.
std::vector<HijackAlert> more_specific_monitor(std::span<const bgp::BgpUpdate> updates,
                                               const RelayIndex& relays,
                                               DetectionWindow window);

struct PrefixLengthReport {
  /// Prefix length -> number of distinct relay-hosting prefixes.
  std::map<int, std::size_t> histogram;
  std::size_t prefixes = 0;
  std::size_t uncovered_relays = 0;
  /// Share of prefixes shorter than /24.
  double percent_vulnerable = 0.0;

  [[nodiscard]] double percent(int length) const;
};

PrefixLengthReport prefix_length_vulnerability(const RelayIndex& relays,
                                               const PrefixTable<Asn>& origin_map);

void write_prefix_lengths(std::ostream& out, const PrefixLengthReport& report);

struct GuardCandidate {
  Ipv4Address guard;
  /// Current client -> guard AS path.
  AsPath path;
  /// ASes seen on client <-> guard paths over the history window.
  std::set<Asn> history;
};

struct ExitSegment {
  std::vector<AsPath> paths;
  std::set<Asn> history;
};

struct Admissible {
  Ipv4Address guard;
  std::size_t path_length = 0;
};

/// Guards whose client-side AS history (plus current path) shares no AS with
/// the exit segment, shortest path first and then by address. Throws
/// kInvalidArgument without candidates and kNoAdmissibleGuard when every
/// candidate conflicts.
std::vector<Admissible> as_aware_select(std::span<const GuardCandidate> candidates,
                                        const ExitSegment& exit_segment);

/// ASes on any route `rib` used towards `relay` during [from, to).
std::set<Asn> observed_ases(const bgp::SessionRib& rib, Ipv4Address relay, Timestamp from,
                            Timestamp to);

}  // namespace raptor::hijack
