#pragma once

#include "raptor/bgp.hpp"
#include "raptor/model.hpp"

#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace raptor::churn {

enum class SegmentRole { kGuard, kExit };

/// AS `as_number` lay on the path from `session` to `relay` during
/// [t_start, t_end).
struct SegmentObservation {
  Asn as_number = 0;
  std::string session;
  Ipv4Address relay;
  SegmentRole role = SegmentRole::kGuard;
  Timestamp t_start = 0;
  Timestamp t_end = 0;

  auto operator<=>(const SegmentObservation&) const = default;
};

/// Expands ingested ribs into per-AS observations. For every relay, the
/// session's most-specific live entry is followed through time over
/// [window_start, horizon); open entries are closed at the horizon. Relays
/// flagged as both guard and exit are observed under each role. Adjacent
/// intervals for the same (AS, session, relay, role) are merged.
std::vector<SegmentObservation> segment_observations(
    const std::map<std::string, bgp::SessionRib>& ribs, const RelayIndex& relays,
    Timestamp window_start, Timestamp horizon);

/// Observations from the routing state at one instant, each spanning
/// [t, t + 1).
std::vector<SegmentObservation> snapshot_observations(
    const std::map<std::string, bgp::SessionRib>& ribs, const RelayIndex& relays, Timestamp t);

using Circuit = std::pair<Ipv4Address, Ipv4Address>;  // (guard, exit)
using SessionPair = std::pair<std::string, std::string>;  // (src, dst)

/// AS `as_number` sees the client segment (src_session -> guard) and the
/// destination segment (dst_session -> exit) at the same time for
/// `overlap_seconds` in total.
struct CircuitCompromiseRecord {
  std::string src_session;
  std::string dst_session;
  Ipv4Address guard;
  Ipv4Address exit;
  Asn as_number = 0;
  Timestamp overlap_seconds = 0;

  auto operator<=>(const CircuitCompromiseRecord&) const = default;
};

struct CompromiseOptions {
  Timestamp min_overlap = 30;
  /// Source and destination sessions must sit in different local ASes.
  bool require_distinct_as = true;
};

/// Joins guard-side and exit-side observations per AS through an inverted
/// index. A record needs distinct sessions, distinct guard and exit relays,
/// a non-empty simultaneous interval and at least `min_overlap` seconds of
/// it. Output is sorted.
std::vector<CircuitCompromiseRecord> compromised_circuits(
    std::span<const SegmentObservation> observations,
    const std::map<std::string, Asn>& local_as, const CompromiseOptions& options = {});

/// Per (src, dst) session pair: which circuits some AS can compromise.
struct CompromiseSummary {
  std::map<SessionPair, std::set<Circuit>> compromised;
  std::map<Asn, std::set<Circuit>> per_as;
  std::size_t total_circuits = 0;
  /// Bandwidth weight of each circuit endpoint, keyed by address.
  std::map<Ipv4Address, double> guard_weight;
  std::map<Ipv4Address, double> exit_weight;

  [[nodiscard]] std::size_t count(const SessionPair& pair) const;
  [[nodiscard]] double percent(const SessionPair& pair) const;
  /// Share of bandwidth-weighted circuits (weight = guard bw * exit bw).
  [[nodiscard]] double weighted_percent(const SessionPair& pair) const;
  [[nodiscard]] std::size_t compromisable_pairs() const;
};

/// Session pairs that form the analysis universe.
std::vector<SessionPair> session_pairs(const std::map<std::string, Asn>& local_as,
                                       bool require_distinct_as);

CompromiseSummary summarize(std::span<const CircuitCompromiseRecord> records,
                            const std::map<std::string, Asn>& local_as,
                            const RelayIndex& relays, bool require_distinct_as = true);

/// Compromise at the initial routing state, before any update is applied.
CompromiseSummary static_baseline(const std::map<std::string, bgp::SessionRib>& ribs,
                                  const RelayIndex& relays,
                                  const std::map<std::string, Asn>& local_as, Timestamp t0,
                                  bool require_distinct_as = true);

struct ChurnAnalysis {
  std::vector<CircuitCompromiseRecord> baseline_records;
  std::vector<CircuitCompromiseRecord> window_records;
  CompromiseSummary baseline;
  /// Baseline compromise plus everything compromised over the window.
  CompromiseSummary with_updates;
};

ChurnAnalysis analyze_churn(const std::map<std::string, bgp::SessionRib>& ribs,
                            const RelayIndex& relays, const std::map<std::string, Asn>& local_as,
                            Timestamp t0, Timestamp horizon, const CompromiseOptions& options = {});

struct CcdfPoint {
  double x_percent = 0.0;
  double y_percent = 0.0;
};

/// Complementary distribution of the per-pair compromised share: (x, y)
/// means at least y% of pairs have at least x% of circuits compromised.
/// Throws kEmptyInput when the pair universe is empty.
std::vector<CcdfPoint> ccdf(const CompromiseSummary& summary,
                            std::span<const SessionPair> universe, bool weighted = false);

/// Evaluates the step curve at `x`.
double ccdf_at(std::span<const CcdfPoint> curve, double x);

struct PairRatio {
  SessionPair pair;
  std::size_t baseline = 0;
  std::size_t with_updates = 0;
  double ratio = 1.0;
};

struct ChurnRatio {
  std::vector<PairRatio> ratios;
  std::vector<PairRatio> newly_compromisable;
};

ChurnRatio churn_ratio(const CompromiseSummary& baseline, const CompromiseSummary& with_updates,
                       std::span<const SessionPair> universe);

struct CoverageRow {
  Asn asn = 0;
  std::size_t circuits = 0;
  double percent = 0.0;
};

/// Share of all (guard, exit) circuits each AS can observe from at least one
/// session pair, highest first.
std::vector<CoverageRow> as_circuit_coverage(std::span<const CircuitCompromiseRecord> records,
                                             const RelayIndex& relays);

/// Number of (guard, exit) circuits with distinct relays.
std::size_t circuit_universe_size(const RelayIndex& relays);

void write_records(std::ostream& out, std::span<const CircuitCompromiseRecord> records);
/// One row per session pair: src,dst,compromised,total,percent,weighted_percent.
void write_summary(std::ostream& out, const CompromiseSummary& summary,
                   std::span<const SessionPair> universe);
void write_ccdf(std::ostream& out, std::span<const CcdfPoint> curve);
void write_ratios(std::ostream& out, const ChurnRatio& ratio);
void write_coverage(std::ostream& out, std::span<const CoverageRow> rows);

}  // namespace raptor::churn
