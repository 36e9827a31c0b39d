#include "oracles.hpp"

#include "raptor/bgp.hpp"
#include "raptor/error.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace raptor;
using namespace raptor::bgp;
using fixture::announce;
using fixture::ip;
using fixture::pfx;
using fixture::withdraw;

namespace {

RelayIndex relays_at(std::initializer_list<const char*> addrs) {
  std::vector<RelayDescriptor> r;
  for (auto a : addrs) r.push_back({ip(a), true, true, 1, ""});
  return RelayIndex(r);
}

}  // namespace

TEST_CASE("parse_updates keeps good lines and reports bad ones") {
  std::ostringstream text;
  text << "timestamp,session,kind,prefix,path\n";
  for (int i = 0; i < 100; ++i) {
    if (i == 42) {
      text << "1000042,rv1,A,45.0.0.0/33,\"3356 16276\"\n";
    } else if (i % 3 == 0) {
      text << 1000000 + i << ",rv1,W,45.0." << i << ".0/24,\n";
    } else {
      text << 1000000 + i << ",rv1,A,45.0." << i << ".0/24,\"3356 16276\"\n";
    }
  }
  std::istringstream in(text.str());
  auto parsed = parse_updates(in);
  CHECK(parsed.updates.size() == 99);
  REQUIRE(parsed.diagnostics.size() == 1);
  CHECK(parsed.diagnostics[0].line == 44);
  CHECK(parsed.updates[1].path.ases() == std::vector<Asn>{3356, 16276});
  CHECK(parsed.updates[0].kind == UpdateKind::kWithdraw);
}

TEST_CASE("parse_updates sorts and round trips") {
  std::vector<BgpUpdate> u{announce(20, "a", "45.0.0.0/16", {1, 2}), withdraw(10, "a", "45.1.0.0/16"),
                           announce(20, "b", "45.0.0.0/16", {3, 2})};
  std::ostringstream out;
  write_updates(out, u);
  std::istringstream in(out.str());
  auto back = parse_updates(in);
  REQUIRE(back.updates.size() == 3);
  CHECK(back.diagnostics.empty());
  CHECK(back.updates[0] == u[1]);
  CHECK(back.updates[1] == u[0]);
  CHECK(back.updates[2] == u[2]);
}

TEST_CASE("rib tracks intervals and longest matches") {
  const auto idx = relays_at({"45.0.1.10"});
  SessionRib rib({"rv", 1});
  rib.apply(announce(100, "rv", "45.0.0.0/16", {1, 2}), idx);
  rib.apply(announce(150, "rv", "99.0.0.0/16", {1, 9}), idx);
  rib.apply(announce(200, "rv", "45.0.1.0/24", {1, 3, 4}), idx);
  rib.apply(announce(250, "rv", "45.0.1.0/24", {1, 3, 4}), idx);
  rib.apply(announce(300, "rv", "45.0.0.0/16", {1, 5, 2}), idx);
  rib.apply(withdraw(400, "rv", "45.0.1.0/24"), idx);

  CHECK(rib.tracked_prefixes().size() == 2);
  CHECK_FALSE(rib.route_for_relay(ip("45.0.1.10"), 99));
  CHECK(rib.route_for_relay(ip("45.0.1.10"), 150)->path.ases() == std::vector<Asn>{1, 2});
  CHECK(rib.route_for_relay(ip("45.0.1.10"), 260)->path.ases() == std::vector<Asn>{1, 3, 4});
  CHECK(rib.route_for_relay(ip("45.0.1.10"), 400)->path.ases() == std::vector<Asn>{1, 5, 2});

  auto tl = rib.timeline(pfx("45.0.1.0/24"));
  REQUIRE(tl.size() == 1);
  CHECK(tl[0].t_start == 200);
  CHECK(tl[0].t_end == 400);
  auto tl16 = rib.timeline(pfx("45.0.0.0/16"));
  REQUIRE(tl16.size() == 2);
  CHECK(tl16[0].t_end == 300);
  CHECK(tl16[1].open());

  CHECK_THROWS_AS(rib.apply(announce(399, "rv", "45.0.0.0/16", {1}), idx), Error);
}

TEST_CASE("historic route lookups match replayed snapshots") {
  std::mt19937_64 rng(5);
  const char* prefixes[] = {"45.0.0.0/8", "45.0.0.0/16", "45.0.1.0/24", "45.1.0.0/16", "45.0.1.8/29"};
  const char* relay_addrs[] = {"45.0.1.10", "45.1.2.3", "45.0.9.9"};
  const auto idx = relays_at({"45.0.1.10", "45.1.2.3", "45.0.9.9"});
  for (int round = 0; round < 30; ++round) {
    std::vector<BgpUpdate> stream;
    Timestamp t = 0;
    for (int i = 0; i < 40; ++i) {
      t += static_cast<Timestamp>(rng() % 4);
      const char* p = prefixes[rng() % 5];
      if (rng() % 3 == 0) {
        stream.push_back(withdraw(t, "s", p));
      } else {
        stream.push_back(announce(t, "s", p, {1, static_cast<Asn>(2 + rng() % 3), 7}));
      }
    }
    SessionRib rib({"s", 1});
    for (const auto& u : stream) rib.apply(u, idx);
    for (Timestamp q = 0; q <= t + 1; ++q) {
      std::map<IpPrefix, AsPath> state;
      for (const auto& u : stream) {
        if (u.timestamp > q) break;
        if (u.kind == UpdateKind::kAnnounce) state[u.prefix] = u.path; else state.erase(u.prefix);
      }
      for (auto a : relay_addrs) {
        const AsPath* want = nullptr;
        int len = -1;
        for (const auto& [p, path] : state) {
          if (p.covers(ip(a)) && p.length() > len) {
            len = p.length();
            want = &path;
          }
        }
        auto got = rib.route_for_relay(ip(a), q);
        REQUIRE(got.has_value() == (want != nullptr));
        if (want) CHECK(got->path == *want);
      }
    }
  }
}

TEST_CASE("session reset re-dumps are filtered") {
  std::vector<BgpUpdate> u;
  for (int i = 0; i < 10; ++i) {
    u.push_back(announce(100 + i, "rv", ("45.0." + std::to_string(i) + ".0/24").c_str(), {1, 2}));
  }
  for (int i = 0; i < 10; ++i) {
    u.push_back(announce(100 + 3600 + 10 + i, "rv", ("45.0." + std::to_string(i) + ".0/24").c_str(), {1, 2}));
  }
  u.push_back(announce(100 + 3600 + 30, "rv", "45.0.0.0/24", {1, 3, 2}));
  auto kept = filter_session_resets(u);
  CHECK(kept.size() == 11);
  CHECK(kept.back().path.ases() == std::vector<Asn>{1, 3, 2});

  // A handful of repeats after a gap is not a table transfer.
  std::vector<BgpUpdate> few(u.begin(), u.begin() + 10);
  few.push_back(announce(100 + 3600 + 10, "rv", "45.0.0.0/24", {1, 2}));
  CHECK(filter_session_resets(few).size() == 11);
}

TEST_CASE("local AS resolution and ingest") {
  std::vector<BgpUpdate> u{announce(1, "a", "45.0.0.0/16", {64500, 2}), announce(2, "b", "45.0.0.0/16", {3, 2})};
  auto las = resolve_local_as(u, {{"b", 9}});
  CHECK(las["a"] == 64500);
  CHECK(las["b"] == 9);
  auto ribs = ingest(u, relays_at({"45.0.0.1"}), las);
  REQUIRE(ribs.size() == 2);
  CHECK(ribs["a"].session().local_as == 64500);
  CHECK(ribs["b"].route_for_relay(ip("45.0.0.1"), 5)->path.ases() == std::vector<Asn>{3, 2});
}
