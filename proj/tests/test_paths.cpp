#include "oracles.hpp"

#include "raptor/error.hpp"
#include "raptor/paths.hpp"
#include "raptor/simulation.hpp"

#include <doctest.h>

#include <sstream>

using namespace raptor;
using namespace raptor::paths;
using fixture::pfx;

namespace {

AsLevelPath path(PathRole role, const char* probe, const char* target, const char* day, std::vector<Asn> ases) {
  AsLevelPath p;
  p.role = role;
  p.probe = probe;
  p.target = target;
  p.day = day;
  p.ases = std::move(ases);
  return p;
}

std::set<Asn> as_set(const AsLevelPath* p) { return p ? std::set<Asn>(p->ases.begin(), p->ases.end()) : std::set<Asn>{}; }

bool intersects(const std::set<Asn>& a, const std::set<Asn>& b) {
  for (Asn x : a) {
    if (b.count(x)) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("a reverse-path overlap is asymmetric-only") {
  // client AS 1, guard AS 3, exit AS 5, destination AS 7. AS 4 carries
  // only the two reverse paths.
  std::vector<AsLevelPath> v{path(PathRole::kP1, "c", "g", "d1", {1, 2, 3}),
                             path(PathRole::kP2, "g", "c", "d1", {3, 4, 1}),
                             path(PathRole::kP3, "e", "x", "d1", {5, 6, 7}),
                             path(PathRole::kP4, "x", "e", "d1", {7, 4, 5})};
  PathDataset ds(v);
  auto q = ds.quad({"c", "g", "e", "x"}, "d1");
  const auto sym = vulnerable(q, Mode::kSymmetric);
  const auto asym = vulnerable(q, Mode::kAsymmetric);
  CHECK_FALSE(sym.vulnerable);
  CHECK(asym.vulnerable);
  CHECK(asym.witness == std::set<Asn>{4});
  CHECK_FALSE(vulnerable(q, Mode::kAsymmetric, {4}).vulnerable);

  auto rows = vulnerability_timeseries(ds);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].quads == 1);
  CHECK(rows[0].symmetric == 0.0);
  CHECK(rows[0].asymmetric == doctest::Approx(100.0));
}

TEST_CASE("missing paths") {
  QuadPaths none;
  CHECK_THROWS_AS(vulnerable(none, Mode::kSymmetric), Error);
  AsLevelPath a = path(PathRole::kP1, "c", "g", "d", {1});
  AsLevelPath b = path(PathRole::kP3, "e", "x", "d", {1});
  QuadPaths sym_only{&a, nullptr, &b, nullptr};
  CHECK(vulnerable(sym_only, Mode::kSymmetric).vulnerable);
  CHECK_THROWS_AS(vulnerable(sym_only, Mode::kAsymmetric), Error);
}

TEST_CASE("a missing day inherits the last measurement") {
  std::vector<AsLevelPath> v{path(PathRole::kP1, "c", "g", "2015-03-01", {1, 2}),
                             path(PathRole::kP2, "g", "c", "2015-03-01", {2, 1}),
                             path(PathRole::kP3, "e", "x", "2015-03-01", {5, 6}),
                             path(PathRole::kP4, "x", "e", "2015-03-01", {6, 5}),
                             path(PathRole::kP1, "c", "g", "2015-03-02", {1, 2}),
                             path(PathRole::kP2, "g", "c", "2015-03-02", {2, 1}),
                             path(PathRole::kP3, "e", "x", "2015-03-02", {5, 2, 6}),
                             path(PathRole::kP4, "x", "e", "2015-03-03", {6, 5})};
  PathDataset ds(v);
  CHECK(ds.days().size() == 3);
  const auto* p = ds.find(PathRole::kP1, "c", "g", "2015-03-03");
  REQUIRE(p);
  CHECK(p->inherited);
  CHECK_FALSE(ds.find(PathRole::kP1, "c", "g", "2015-02-28"));
  auto rows = vulnerability_timeseries(ds);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].asymmetric == 0.0);
  CHECK(rows[1].symmetric == doctest::Approx(100.0));
  CHECK(rows[2].symmetric == doctest::Approx(100.0));
  CHECK(rows[2].symmetric_day1_fixed == 0.0);
  CHECK(rows[2].asymmetric_cumulative == doctest::Approx(100.0));
  CHECK(rows[1].inherited_paths == 1);
}

TEST_CASE("symmetric vulnerability implies asymmetric on generated campaigns") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    sim::TracerouteScenario sc;
    sc.seed = seed;
    sc.clients = 4;
    sc.guards = 5;
    sc.exits = 5;
    sc.dests = 3;
    sc.days = 8;
    auto data = sim::gen_traceroutes(sc);
    std::vector<AsLevelPath> resolved;
    for (const auto& r : data.records) resolved.push_back(resolve(r, data.mapping));
    PathDataset ds(resolved);
    auto rows = vulnerability_timeseries(ds);
    REQUIRE(rows.size() == ds.days().size());
    double prev = 0;
    std::set<std::tuple<std::string, std::string, std::string, std::string>> ever;
    for (std::size_t d = 0; d < rows.size(); ++d) {
      const auto& row = rows[d];
      CHECK(row.symmetric <= row.asymmetric);
      CHECK(row.asymmetric <= row.asymmetric_cumulative);
      CHECK(row.asymmetric_cumulative >= prev);
      CHECK(row.symmetric_day1_fixed == rows[0].symmetric);
      prev = row.asymmetric_cumulative;

      std::size_t sym = 0, asym = 0;
      for (const auto& c : ds.clients()) {
        for (const auto& g : ds.guards()) {
          for (const auto& e : ds.exits()) {
            for (const auto& x : ds.dests()) {
              auto q = ds.quad({c, g, e, x}, row.day);
              if (!q.p1 || !q.p2 || !q.p3 || !q.p4) continue;
              const auto a1 = as_set(q.p1), a2 = as_set(q.p2), a3 = as_set(q.p3), a4 = as_set(q.p4);
              const bool s = intersects(a1, a3);
              std::set<Asn> client_side = a1, dest_side = a3;
              client_side.insert(a2.begin(), a2.end());
              dest_side.insert(a4.begin(), a4.end());
              const bool a = intersects(client_side, dest_side);
              CHECK(vulnerable(q, Mode::kSymmetric).vulnerable == s);
              CHECK(vulnerable(q, Mode::kAsymmetric).vulnerable == a);
              if (s) ++sym;
              if (a) {
                ++asym;
                ever.insert({c, g, e, x});
              }
            }
          }
        }
      }
      CHECK(row.symmetric == doctest::Approx(100.0 * static_cast<double>(sym) / static_cast<double>(row.quads)));
      CHECK(row.asymmetric == doctest::Approx(100.0 * static_cast<double>(asym) / static_cast<double>(row.quads)));
      CHECK(row.asymmetric_cumulative ==
            doctest::Approx(100.0 * static_cast<double>(ever.size()) / static_cast<double>(row.quads)));
    }
  }
}

TEST_CASE("traceroute hop resolution") {
  PrefixTable<Asn> m;
  m.insert(pfx("45.0.0.0/16"), 100);
  m.insert(pfx("46.0.0.0/16"), 200);
  std::vector<std::string> hops{"10.0.0.1", "45.0.1.1", "45.0.2.2", "*", "46.0.0.9", "47.0.0.1"};
  auto p = resolve_traceroute(hops, m);
  CHECK(p.ases == std::vector<Asn>{100, 200});
  CHECK(p.gap);
  std::vector<std::string> clean{"192.168.0.1", "45.0.1.1", "46.0.0.9"};
  auto q = resolve_traceroute(clean, m);
  CHECK(q.ases == std::vector<Asn>{100, 200});
  CHECK_FALSE(q.gap);
  CHECK_THROWS_AS(resolve_traceroute(std::vector<std::string>{}, m), Error);
}

TEST_CASE("traceroute records round trip") {
  std::vector<TracerouteRecord> r{{"c1", "g1", PathRole::kP2, "2015-03-01", {"45.0.0.1", "*"}}};
  std::ostringstream out;
  write_traceroutes(out, r);
  std::istringstream in(out.str());
  auto back = read_traceroutes(in);
  REQUIRE(back.size() == 1);
  CHECK(back[0].role == PathRole::kP2);
  CHECK(back[0].hops == r[0].hops);
  CHECK(*parse_role("P3") == PathRole::kP3);
}
