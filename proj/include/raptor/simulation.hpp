#pragma once

#include "raptor/bgp.hpp"
#include "raptor/churn.hpp"
#include "raptor/hijack.hpp"
#include "raptor/model.hpp"
#include "raptor/paths.hpp"
#include "raptor/prefix_table.hpp"
#include "raptor/traffic.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace raptor::sim {

/// Seeded generator with platform-independent draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  double log_uniform(double lo, double hi);
  /// Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n) { return n == 0 ? 0 : engine_() % n; }
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(index(static_cast<std::uint64_t>(hi - lo + 1)));
  }
  bool chance(double p) { return uniform01() < p; }
  std::uint32_t u32() { return static_cast<std::uint32_t>(engine_() >> 32); }
  std::uint64_t next() { return engine_(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

enum class BottleneckSide { kGuard, kExit };

/// Flows sharing one relay's capacity. When the group's demand exceeds the
/// capacity, rates are cut to the max-min fair allocation.
struct BottleneckGroup {
  BottleneckSide side = BottleneckSide::kGuard;
  std::vector<std::size_t> flows;
  /// Bytes per second.
  double capacity = 0.0;
  /// Each second the usable capacity is capacity * f with f log-uniform in
  /// [capacity_jitter, 1]; this common factor couples the group's flows.
  double capacity_jitter = 1.0;
};

struct TrafficScenario {
  std::uint64_t seed = 1;
  std::size_t n_pairs = 50;
  double duration = 300.0;
  /// Flow start times are spread uniformly over [0, start_spread).
  double start_spread = 0.2;
  double base_rate_min = 50e3;
  double base_rate_max = 100e3;
  /// Replaces the rate process with a constant when set.
  std::optional<double> constant_rate;
  double jitter_low = 0.5;
  double jitter_high = 2.0;
  std::vector<BottleneckGroup> bottlenecks;
  double ack_delay = 0.01;
  std::uint32_t mss = 1448;
  double tick = 0.01;
  /// One-way latency from the server to the client, drawn per flow.
  double latency_min = 0.05;
  double latency_max = 0.5;
  /// Extra per-packet delay, order preserving.
  double packet_jitter = 0.02;
  bool loss = false;
  double loss_rate = 0.01;
};

/// Every pair shares one guard with the given capacity share of the mean
/// aggregate demand.
TrafficScenario shared_guard(TrafficScenario base, double capacity_share, double capacity_jitter);

/// Coupling used by the standard shared-guard and interception scenarios.
inline constexpr double kSharedGuardShare = 0.73;
inline constexpr double kSharedGuardJitter = 0.5;

struct TrafficTruth {
  std::map<std::string, std::string> pairing;
  /// Application bytes each pair transferred, by client id.
  std::map<std::string, std::uint64_t> bytes;
};

struct TrafficDataset {
  std::vector<traffic::EndpointTrace> clients;
  std::vector<traffic::EndpointTrace> servers;
  TrafficTruth truth;
};

/// Download flows observed at the client (client <-> guard) and at the
/// server (exit <-> server). Server traces are shuffled; the pairing is in
/// the ground truth. Throws kInvalidScenario.
TrafficDataset gen_traffic(const TrafficScenario& scenario);

struct InterceptionScenario {
  TrafficScenario traffic;
  double announce_at = 20.0;
  double propagation = 35.0;
  double withdraw_at = 300.0;
  double reconvergence = 22.0;
};

/// The standard interception setup: 50 pairs behind one shared guard,
/// transfers long enough to outlast the capture.
InterceptionScenario default_interception(std::uint64_t seed);

struct CaptureInterval {
  double start = 0.0;
  double end = 0.0;
};

/// [announce_at + propagation, withdraw_at + reconvergence); throws
/// kInvalidScenario unless announce_at + propagation < withdraw_at.
CaptureInterval capture_interval(double announce_at, double propagation, double withdraw_at,
                                 double reconvergence);

struct TunnelSample {
  std::int64_t second = 0;
  /// Seconds relative to the attacker switchover.
  double adjusted = 0.0;
  std::uint64_t good_packets = 0;
  std::uint64_t good_bytes = 0;
  std::uint64_t attacker_packets = 0;
  std::uint64_t attacker_bytes = 0;
};

struct InterceptionDataset {
  TrafficDataset traffic;
  CaptureInterval capture;
  /// Client -> guard acknowledgments the attacker saw, one trace per client.
  std::vector<traffic::EndpointTrace> attacker_captures;
  std::vector<TunnelSample> timeline;
};

InterceptionDataset gen_interception_timeline(const InterceptionScenario& scenario);

struct RouteSpec {
  std::string session;
  IpPrefix prefix;
  AsPath path;
};

/// A scheduled path change; no path means withdrawal.
struct ChurnEvent {
  Timestamp at = 0;
  std::string session;
  IpPrefix prefix;
  std::optional<AsPath> path;
};

enum class EventKind { kHijack, kInterception };

/// Hijack: the attacker announces the listed prefixes themselves and the
/// legitimate path returns at the end. Interception: the listed prefixes are
/// more-specifics the attacker announces and later withdraws.
struct InjectedEvent {
  EventKind kind = EventKind::kHijack;
  std::string label;
  std::vector<IpPrefix> prefixes;
  Asn attacker = 0;
  Timestamp start = 0;
  Timestamp duration = 0;
  /// Sessions that hear the announcement; empty means all.
  std::vector<std::string> sessions;
};

struct RoutingScenario {
  std::uint64_t seed = 1;
  Timestamp t0 = 0;
  Timestamp horizon = 0;
  std::map<std::string, Asn> sessions;
  std::vector<RelayDescriptor> relays;
  std::vector<RouteSpec> initial;
  std::vector<ChurnEvent> churn;
  std::vector<InjectedEvent> events;
  /// Fill the planted compromise set by per-second enumeration.
  bool compromise_truth = false;
  churn::CompromiseOptions compromise;
};

struct PlantedEvent {
  std::string label;
  EventKind kind = EventKind::kHijack;
  IpPrefix prefix;
  Asn attacker = 0;
  Timestamp start = 0;
  Timestamp end = 0;
};

struct RoutingTruth {
  std::vector<PlantedEvent> events;
  std::optional<std::vector<churn::CircuitCompromiseRecord>> compromised;
};

struct RoutingDataset {
  /// Initial table, every entry announced at t0.
  std::vector<bgp::BgpUpdate> initial;
  std::vector<bgp::BgpUpdate> updates;
  RoutingTruth truth;

  /// Initial table followed by the updates.
  [[nodiscard]] std::vector<bgp::BgpUpdate> stream() const;
};

/// Throws kInvalidScenario for unknown sessions, unsorted schedules or
/// events outside the window.
RoutingDataset gen_updates(const RoutingScenario& scenario);

/// Planted events grouped by label, as consumed by cross_reference.
std::vector<hijack::HijackEvent> known_events(const RoutingTruth& truth);

/// Prefix -> origin AS of the initial table.
PrefixTable<Asn> origin_map(const RoutingScenario& scenario);

/// Per-second compromise oracle over [t0, horizon): replays the updates,
/// finds every relay's most-specific route each second and counts the
/// seconds each AS sits on both segments.
std::vector<churn::CircuitCompromiseRecord> enumerate_compromise(
    std::span<const bgp::BgpUpdate> stream, const std::vector<RelayDescriptor>& relays,
    const std::map<std::string, Asn>& sessions, Timestamp t0, Timestamp horizon,
    const churn::CompromiseOptions& options);

/// Small random churn fixture: at most 5 sessions, 10 relays, 5 ASes and
/// `max_updates` updates over a 600 s window.
RoutingScenario random_churn_fixture(std::uint64_t seed, std::size_t max_updates = 50);

/// 20 exact-prefix hijacks and 5 more-specific interceptions of 60-600 s
/// over a day of long-lived background routes.
RoutingScenario hijack_suite(std::uint64_t seed);

/// A mass origination burst: `burst_prefixes` foreign-origin prefixes of
/// which a handful cover the planted relays.
struct IndosatShape {
  std::string label;
  Asn attacker = 4761;
  std::size_t burst_prefixes = 2800;
  std::size_t guard_only = 1;
  std::size_t exit_only = 4;
  std::size_t both = 0;
  /// Event prefixes that cover relays; at least one per planted relay.
  std::size_t relay_prefixes = 7;
  std::size_t background_relays = 2000;
};

IndosatShape indosat_2011();
IndosatShape indosat_2014();
RoutingScenario indosat_scenario(const IndosatShape& shape, std::uint64_t seed);

struct TracerouteScenario {
  std::uint64_t seed = 1;
  std::size_t clients = 10;
  std::size_t guards = 25;
  std::size_t exits = 25;
  std::size_t dests = 10;
  std::size_t days = 21;
  std::size_t tier1 = 8;
  std::size_t tier2 = 40;
  /// Guard and exit relays live in a few hosting ASes.
  std::size_t hosting = 12;
  /// Chance a path crosses a tier-1 core instead of a tier-2 peering link.
  double core_share = 0.35;
  /// Chance the reverse path mirrors the forward one.
  double symmetric_reverse = 0.5;
  /// Daily chance a path re-routes.
  double daily_change = 0.08;
  double gap_rate = 0.03;
};

struct TracerouteDataset {
  std::vector<paths::TracerouteRecord> records;
  PrefixTable<Asn> mapping;
  std::map<std::string, Asn> endpoint_as;
};

TracerouteDataset gen_traceroutes(const TracerouteScenario& scenario);

/// Scenario documents. Each carries a "type" (traffic, interception,
/// routing, traceroutes) and the fields of the matching struct; missing
/// fields keep their defaults.
TrafficScenario traffic_from_json(const nlohmann::json& j);
InterceptionScenario interception_from_json(const nlohmann::json& j);
RoutingScenario routing_from_json(const nlohmann::json& j);
TracerouteScenario traceroutes_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TrafficScenario& s);

}  // namespace raptor::sim
