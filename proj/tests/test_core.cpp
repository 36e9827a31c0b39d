#include "oracles.hpp"

#include "raptor/csv.hpp"
#include "raptor/dataset_io.hpp"
#include "raptor/error.hpp"
#include "raptor/ip.hpp"
#include "raptor/model.hpp"
#include "raptor/prefix_table.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace raptor;
using fixture::ip;
using fixture::pfx;

TEST_CASE("address parsing") {
  CHECK(ip("198.245.63.7").value() == 0xC6F53F07u);
  CHECK(ip("198.245.63.7").to_string() == "198.245.63.7");
  CHECK_FALSE(Ipv4Address::parse("256.1.1.1"));
  CHECK_FALSE(Ipv4Address::parse("1.2.3"));
  CHECK_FALSE(Ipv4Address::parse("1.2.3.4.5"));
  CHECK_FALSE(Ipv4Address::parse(""));
  CHECK(ip("10.3.4.5").is_private());
  CHECK(ip("192.168.1.1").is_private());
  CHECK(ip("172.16.0.1").is_private());
  CHECK_FALSE(ip("8.8.8.8").is_private());
}

TEST_CASE("prefix normalization and coverage") {
  const auto p = pfx("198.245.63.77/24");
  CHECK(p.to_string() == "198.245.63.0/24");
  CHECK(p.covers(ip("198.245.63.255")));
  CHECK_FALSE(p.covers(ip("198.245.64.0")));
  CHECK(pfx("10.0.0.0/8").covers(pfx("10.1.0.0/16")));
  CHECK_FALSE(pfx("10.1.0.0/16").covers(pfx("10.0.0.0/8")));
  CHECK(pfx("10.1.0.0/16").overlaps(pfx("10.0.0.0/8")));
  CHECK_FALSE(pfx("10.1.0.0/16").overlaps(pfx("10.2.0.0/16")));
  CHECK(pfx("0.0.0.0/0").covers(ip("255.255.255.255")));
  CHECK(pfx("1.2.3.4").length() == 32);
  CHECK_FALSE(IpPrefix::parse("1.2.3.0/33"));
  CHECK(is_more_specific_of(pfx("45.1.1.0/24"), pfx("45.1.0.0/22")));
  CHECK_FALSE(is_more_specific_of(pfx("45.1.0.0/22"), pfx("45.1.0.0/22")));
  CHECK(pfx("45.1.0.0/22").last().to_string() == "45.1.3.255");
}

TEST_CASE("prefix table longest match agrees with a linear scan") {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 20; ++round) {
    PrefixTable<int> table;
    std::vector<std::pair<IpPrefix, int>> entries;
    for (int i = 0; i < 60; ++i) {
      const int len = static_cast<int>(rng() % 33);
      const IpPrefix p(Ipv4Address(static_cast<std::uint32_t>(0x2D000000u | (rng() & 0x0003FFFFu))), len);
      table.insert(p, i);
      std::erase_if(entries, [&](const auto& e) { return e.first == p; });
      entries.emplace_back(p, i);
    }
    CHECK(table.size() == entries.size());
    for (int q = 0; q < 200; ++q) {
      const Ipv4Address a(static_cast<std::uint32_t>(0x2D000000u | (rng() & 0x0003FFFFu)));
      const std::pair<IpPrefix, int>* best = nullptr;
      for (const auto& e : entries) {
        if (e.first.covers(a) && (!best || e.first.length() > best->first.length())) best = &e;
      }
      const int* got = table.lookup(a);
      REQUIRE((got == nullptr) == (best == nullptr));
      if (best) CHECK(*got == best->second);
    }
  }
}

TEST_CASE("prefix table erase, visit and freeze") {
  PrefixTable<int> t;
  t.insert(pfx("10.0.0.0/8"), 1);
  t.insert(pfx("10.1.0.0/16"), 2);
  t.insert(pfx("10.1.2.0/24"), 3);
  std::vector<int> seen;
  t.for_each_covering(ip("10.1.2.3"), [&](const IpPrefix&, int v) { seen.push_back(v); });
  CHECK(seen == std::vector<int>{1, 2, 3});
  CHECK(*t.lookup(ip("10.1.9.9")) == 2);
  CHECK(t.erase(pfx("10.1.0.0/16")));
  CHECK_FALSE(t.erase(pfx("10.1.0.0/16")));
  CHECK(*t.lookup(ip("10.1.9.9")) == 1);
  t.freeze();
  CHECK_THROWS_AS(t.insert(pfx("11.0.0.0/8"), 4), Error);
  CHECK(*t.lookup(ip("10.1.2.9")) == 3);
}

TEST_CASE("AS path parsing and prepending") {
  auto p = AsPath::parse("3356 3356 16276");
  REQUIRE(p);
  CHECK(p->ases() == std::vector<Asn>{3356, 16276});
  CHECK(*p->origin() == 16276);
  CHECK(p->contains(3356));
  CHECK(p->to_string() == "3356 16276");
  CHECK_FALSE(AsPath::parse("3356 x"));
  CHECK_FALSE(AsPath().origin());
}

TEST_CASE("relay index") {
  std::vector<RelayDescriptor> relays{
      {ip("45.0.1.10"), true, false, 10, "a"},
      {ip("45.0.2.10"), false, true, 20, "b"},
      {ip("45.0.2.11"), true, true, 30, "c"},
      {ip("45.9.0.1"), false, false, 5, "middle"},
  };
  const RelayIndex idx(relays);
  CHECK(idx.size() == 3);
  CHECK(idx.within(pfx("45.0.2.0/24")).size() == 2);
  CHECK(idx.any_within(pfx("45.0.0.0/16")));
  CHECK_FALSE(idx.any_within(pfx("45.9.0.0/16")));
  CHECK(*idx.role_within(pfx("45.0.1.0/24")) == RelayRole::kGuard);
  CHECK(*idx.role_within(pfx("45.0.0.0/16")) == RelayRole::kBoth);
  CHECK_FALSE(idx.role_within(pfx("46.0.0.0/8")));
  CHECK(idx.guard_addresses().size() == 2);
  CHECK(idx.exit_addresses().size() == 2);
}

TEST_CASE("csv split and escape") {
  CHECK(csv::split("a,\"b,c\",d") == std::vector<std::string>{"a", "b,c", "d"});
  CHECK(csv::split("x,\"say \"\"hi\"\"\",") == std::vector<std::string>{"x", "say \"hi\"", ""});
  CHECK(csv::escape("plain") == "plain");
  CHECK(csv::escape("a,b") == "\"a,b\"");
  std::istringstream in("# meta\n\nh1,h2\n1,2\n");
  csv::Reader r(in);
  std::vector<std::string> f;
  REQUIRE(r.next(f));
  CHECK(f[0] == "h1");
  REQUIRE(r.next(f));
  CHECK(r.line_number() == 4);
  CHECK_FALSE(r.next(f));
}

TEST_CASE("relay and prefix files round trip") {
  std::vector<RelayDescriptor> relays{{ip("45.0.1.10"), true, false, 10.5, "alpha"},
                                      {ip("45.0.2.10"), false, true, 20, "beta"}};
  std::ostringstream out;
  write_relays(out, relays);
  std::istringstream in(out.str());
  auto back = read_relays(in);
  REQUIRE(back.size() == 2);
  CHECK(back[0].address == relays[0].address);
  CHECK(back[0].bandwidth == doctest::Approx(10.5));
  CHECK(back[1].is_exit);
  CHECK(back[1].nickname == "beta");

  std::istringstream bad("address,is_guard,is_exit,bandwidth,nickname\n1.2.3,1,0,1,x\n");
  CHECK_THROWS_AS(read_relays(bad), Error);

  PrefixTable<Asn> map;
  map.insert(pfx("45.0.0.0/16"), 16276);
  map.insert(pfx("45.0.1.0/24"), 24940);
  std::ostringstream mo;
  write_prefix_asn(mo, map);
  std::istringstream mi(mo.str());
  auto m2 = read_prefix_asn(mi);
  CHECK(m2.size() == 2);
  CHECK(*m2.lookup(ip("45.0.1.1")) == 24940);
  CHECK(*m2.lookup(ip("45.0.2.1")) == 16276);
}

TEST_CASE("missing input files raise io errors") {
  try {
    read_relays(std::filesystem::path("/nonexistent/relays.csv"));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
  }
}
