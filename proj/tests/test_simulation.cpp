#include "oracles.hpp"

#include "raptor/error.hpp"
#include "raptor/evaluation.hpp"
#include "raptor/simulation.hpp"

#include <doctest.h>

using namespace raptor;
using namespace raptor::sim;
using traffic::Direction;
using traffic::SignalKind;

namespace {

double final_progress(const traffic::EndpointTrace& t, SignalKind kind, Direction dir) {
  traffic::ProgressOptions o;
  o.kind = kind;
  o.direction = dir;
  o.bin_width = 1;
  o.window = 40;
  o.t0 = 0;
  return extract_progress(t, o).total();
}

bool sorted_by_time(const traffic::EndpointTrace& t) {
  for (std::size_t i = 1; i < t.observations.size(); ++i) {
    if (t.observations[i].timestamp < t.observations[i - 1].timestamp) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("a constant-rate pair conserves bytes at both vantages") {
  TrafficScenario s;
  s.n_pairs = 1;
  s.duration = 10;
  s.constant_rate = 1e6;
  auto d = gen_traffic(s);
  REQUIRE(d.clients.size() == 1);
  REQUIRE(d.servers.size() == 1);
  CHECK(d.truth.bytes.begin()->second == 10000000);
  CHECK(final_progress(d.clients[0], SignalKind::kData, Direction::kFromRelay) == doctest::Approx(1e7));
  CHECK(final_progress(d.clients[0], SignalKind::kAck, Direction::kToRelay) == doctest::Approx(1e7));
  CHECK(final_progress(d.servers[0], SignalKind::kData, Direction::kFromServer) == doctest::Approx(1e7));
  CHECK(final_progress(d.servers[0], SignalKind::kAck, Direction::kToServer) == doctest::Approx(1e7));
  for (const auto& o : d.clients[0].observations) {
    if (o.direction == Direction::kFromRelay) CHECK(o.payload_len <= s.mss);
  }
}

TEST_CASE("traffic generation is deterministic per seed") {
  TrafficScenario s;
  s.n_pairs = 5;
  s.duration = 20;
  auto a = gen_traffic(s);
  auto b = gen_traffic(s);
  REQUIRE(a.clients.size() == b.clients.size());
  for (std::size_t i = 0; i < a.clients.size(); ++i) {
    CHECK(a.clients[i].observations == b.clients[i].observations);
    CHECK(a.servers[i].observations == b.servers[i].observations);
    CHECK(sorted_by_time(a.clients[i]));
    CHECK(sorted_by_time(a.servers[i]));
  }
  CHECK(a.truth.pairing == b.truth.pairing);
  s.seed = 2;
  auto c = gen_traffic(s);
  CHECK(c.clients[0].observations != a.clients[0].observations);
}

TEST_CASE("each ack covers at most two segments") {
  TrafficScenario s;
  s.n_pairs = 2;
  s.duration = 15;
  auto d = gen_traffic(s);
  for (const auto& t : d.servers) {
    std::vector<std::uint64_t> acks;
    for (const auto& o : t.observations) {
      if (o.direction == Direction::kToServer && !o.has(traffic::flag::kSyn)) acks.push_back(o.ack);
    }
    for (std::size_t i = 1; i < acks.size(); ++i) {
      CHECK(static_cast<std::uint32_t>(acks[i] - acks[i - 1]) <= 2 * s.mss);
    }
  }
}

TEST_CASE("pairs correlate with themselves more than with each other") {
  TrafficScenario s;
  s.n_pairs = 2;
  s.duration = 120;
  auto d = gen_traffic(s);
  eval::CorrelationSetup setup;
  setup.window = 120;
  auto run = eval::run_correlation(d.clients, d.servers, setup, &d.truth.pairing);
  for (std::size_t r = 0; r < 2; ++r) {
    const auto& partner = d.truth.pairing.at(run.matrix.row_ids[r]);
    double within = -2, cross = -2;
    for (std::size_t c = 0; c < 2; ++c) {
      const double v = run.matrix.at(r, c).value();
      if (run.matrix.col_ids[c] == partner) within = v; else cross = v;
    }
    CHECK(cross < within);
  }
}

TEST_CASE("a shared guard respects its capacity") {
  TrafficScenario base;
  base.n_pairs = 10;
  base.duration = 30;
  auto s = shared_guard(base, kSharedGuardShare, kSharedGuardJitter);
  REQUIRE(s.bottlenecks.size() == 1);
  const double cap = s.bottlenecks[0].capacity;
  auto d = gen_traffic(s);
  std::map<std::int64_t, double> per_second;
  for (const auto& t : d.servers) {
    for (const auto& o : t.observations) {
      if (o.direction == Direction::kFromServer) per_second[static_cast<std::int64_t>(o.timestamp)] += o.payload_len;
    }
  }
  for (const auto& [sec, bytes] : per_second) {
    if (sec < 1 || sec > 29) continue;
    CHECK(bytes <= cap + 2.0 * static_cast<double>(s.n_pairs) * s.mss);
  }
  auto unshared = gen_traffic(base);
  double total_shared = 0, total_free = 0;
  for (const auto& [k, v] : d.truth.bytes) total_shared += static_cast<double>(v);
  for (const auto& [k, v] : unshared.truth.bytes) total_free += static_cast<double>(v);
  CHECK(total_shared < total_free);
}

TEST_CASE("invalid traffic scenarios") {
  TrafficScenario s;
  s.n_pairs = 0;
  CHECK_THROWS_AS(gen_traffic(s), Error);
  TrafficScenario t;
  t.bottlenecks.push_back({BottleneckSide::kGuard, {0, 0}, 1e5, 1.0});
  CHECK_THROWS_AS(gen_traffic(t), Error);
  TrafficScenario u;
  u.bottlenecks.push_back({BottleneckSide::kExit, {1}, -1, 1.0});
  CHECK_THROWS_AS(gen_traffic(u), Error);
}

TEST_CASE("interception capture interval") {
  auto c = capture_interval(20, 35, 300, 22);
  CHECK(c.start == 55.0);
  CHECK(c.end == 322.0);
  auto z = capture_interval(20, 0, 300, 22);
  CHECK(z.start == 20.0);
  CHECK_THROWS_AS(capture_interval(20, 300, 300, 22), Error);

  auto sc = default_interception(1);
  sc.traffic.n_pairs = 4;
  sc.traffic = shared_guard(sc.traffic, kSharedGuardShare, kSharedGuardJitter);
  auto d = gen_interception_timeline(sc);
  CHECK(d.capture.start == 55.0);
  CHECK(d.capture.end == 322.0);
  REQUIRE(d.attacker_captures.size() == 4);
  for (const auto& t : d.attacker_captures) {
    REQUIRE_FALSE(t.observations.empty());
    for (const auto& o : t.observations) {
      CHECK(o.timestamp >= 55.0);
      CHECK(o.timestamp < 322.0);
      CHECK(o.direction == Direction::kToRelay);
      CHECK(o.has(traffic::flag::kAck));
      CHECK(o.payload_len == 0);
    }
  }
  for (const auto& row : d.timeline) {
    if (row.second < 55 || row.second >= 322) CHECK(row.attacker_packets == 0);
    if (row.second >= 55 && row.second < 322) CHECK(row.good_packets == 0);
    CHECK(row.adjusted == doctest::Approx(static_cast<double>(row.second) - 55.0));
  }
  // The connections survive the switchover and the switch back.
  std::size_t after = 0;
  for (const auto& row : d.timeline) {
    if (row.second >= 322) after += row.good_packets;
  }
  CHECK(after > 0);
}

TEST_CASE("an empty schedule yields only the initial table") {
  RoutingScenario s;
  s.t0 = 100;
  s.horizon = 200;
  s.sessions = {{"a", 1}};
  s.initial = {{"a", fixture::pfx("45.0.0.0/16"), AsPath({1, 2})}};
  auto d = gen_updates(s);
  CHECK(d.updates.empty());
  REQUIRE(d.initial.size() == 1);
  CHECK(d.initial[0].timestamp == 100);
  CHECK(d.truth.events.empty());

  s.churn = {{150, "ghost", fixture::pfx("45.0.0.0/16"), std::nullopt}};
  CHECK_THROWS_AS(gen_updates(s), Error);
}

TEST_CASE("an injected hijack is announced and restored") {
  RoutingScenario s;
  s.t0 = 0;
  s.horizon = 86400;
  s.sessions = {{"a", 1}, {"b", 2}};
  s.relays = {{fixture::ip("45.0.0.1"), true, false, 1, "g"}};
  s.initial = {{"a", fixture::pfx("45.0.0.0/16"), AsPath({1, 10})}, {"b", fixture::pfx("45.0.0.0/16"), AsPath({2, 10})}};
  s.events = {{EventKind::kHijack, "h", {fixture::pfx("45.0.0.0/16")}, 666, 5000, 60, {}}};
  auto d = gen_updates(s);
  CHECK(d.updates.size() == 4);
  REQUIRE(d.truth.events.size() == 1);
  CHECK(d.truth.events[0].start == 5000);
  CHECK(d.truth.events[0].end == 5060);
  const auto stream = d.stream();
  auto alerts = hijack::time_heuristic(stream, RelayIndex(s.relays), {0, 86400}, 0.01);
  REQUIRE(alerts.size() == 1);
  CHECK(alerts[0].origin == 666);
  auto ribs = bgp::ingest(stream, RelayIndex(s.relays), s.sessions);
  CHECK(ribs["a"].route_for_relay(fixture::ip("45.0.0.1"), 5030)->path.origin() == 666u);
  CHECK(ribs["a"].route_for_relay(fixture::ip("45.0.0.1"), 5060)->path.origin() == 10u);
}

TEST_CASE("routing generators are deterministic and planted truth is consistent") {
  auto a = gen_updates(hijack_suite(3));
  auto b = gen_updates(hijack_suite(3));
  CHECK(a.updates == b.updates);
  std::set<std::string> labels;
  std::size_t hijacks = 0, interceptions = 0;
  for (const auto& e : a.truth.events) {
    if (labels.insert(e.label).second) (e.kind == EventKind::kHijack ? hijacks : interceptions)++;
  }
  CHECK(hijacks == 20);
  CHECK(interceptions == 5);
  for (const auto& e : a.truth.events) {
    CHECK(e.end - e.start >= 60);
    CHECK(e.end - e.start <= 600);
  }

  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto sc = random_churn_fixture(seed);
    auto d = gen_updates(sc);
    CHECK(sc.sessions.size() <= 5);
    CHECK(sc.relays.size() <= 10);
    CHECK(d.updates.size() <= 50);
    REQUIRE(d.truth.compromised);
    CHECK(*d.truth.compromised == oracle::brute_force_compromise(d.stream(), sc.relays, sc.sessions, sc.t0,
                                                                 sc.horizon, 30, true));
  }
}

TEST_CASE("scenario documents round trip") {
  TrafficScenario s;
  s.seed = 9;
  s.n_pairs = 7;
  s.constant_rate = 5e4;
  auto back = traffic_from_json(to_json(s));
  CHECK(back.seed == 9);
  CHECK(back.n_pairs == 7);
  CHECK(back.constant_rate == 5e4);
  auto i = interception_from_json({{"announce_at", 10}, {"traffic", {{"n_pairs", 3}}}});
  CHECK(i.announce_at == 10.0);
  CHECK(i.propagation == 35.0);
  CHECK(i.traffic.n_pairs == 3);
}

TEST_CASE("traceroute campaigns") {
  TracerouteScenario s;
  s.clients = 3;
  s.guards = 3;
  s.exits = 3;
  s.dests = 2;
  s.days = 4;
  auto a = gen_traceroutes(s);
  auto b = gen_traceroutes(s);
  CHECK(a.records.size() == b.records.size());
  CHECK_FALSE(a.records.empty());
  std::set<std::string> days;
  for (const auto& r : a.records) days.insert(r.day);
  CHECK(days.size() == 4);
  CHECK(*days.begin() == "2015-03-01");
}
