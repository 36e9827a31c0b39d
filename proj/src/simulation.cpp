#include "raptor/simulation.hpp"

#include "raptor/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <set>
#include <tuple>

namespace raptor::sim {

namespace {

using traffic::Direction;
using traffic::EndpointTrace;
using traffic::PacketObservation;
namespace flag = traffic::flag;

double round_us(double t) { return std::round(t * 1e6) / 1e6; }

[[noreturn]] void invalid(const std::string& why) { throw Error(ErrorCode::kInvalidScenario, why); }

// Max-min fair allocation of `capacity` over `demand`, written in place.
void water_fill(std::vector<double*>& rates, double capacity) {
  double total = 0.0;
  for (double* r : rates) total += *r;
  if (total <= capacity) return;
  std::vector<double*> order = rates;
  std::sort(order.begin(), order.end(), [](double* a, double* b) { return *a < *b; });
  double left = capacity;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const double share = left / static_cast<double>(order.size() - i);
    if (*order[i] <= share) {
      left -= *order[i];
      continue;
    }
    for (std::size_t k = i; k < order.size(); ++k) *order[k] = share;
    break;
  }
}

struct Segment {
  double t = 0.0;
  std::uint32_t len = 0;
  std::uint64_t offset = 0;  // bytes before this segment
  bool retransmit = false;
};

// Receiver-side cumulative ACK schedule: one ACK per two segments, or
// ack_delay after a lone segment when the next one is late.
struct AckEvent {
  double t = 0.0;
  std::uint64_t acked = 0;
};

std::vector<AckEvent> ack_schedule(const std::vector<Segment>& arrivals, double ack_delay,
                                   double back_latency) {
  std::vector<AckEvent> acks;
  int pending = 0;
  for (std::size_t i = 0; i < arrivals.size(); ++i) {
    const auto& s = arrivals[i];
    if (s.retransmit) continue;
    ++pending;
    const std::uint64_t upto = s.offset + s.len;
    std::size_t next = i + 1;
    while (next < arrivals.size() && arrivals[next].retransmit) ++next;
    const bool last = next >= arrivals.size();
    if (pending >= 2) {
      acks.push_back({s.t + 1e-4 + back_latency, upto});
      pending = 0;
    } else if (last || arrivals[next].t > s.t + ack_delay) {
      acks.push_back({s.t + ack_delay + back_latency, upto});
      pending = 0;
    }
  }
  return acks;
}

void finish(EndpointTrace& trace) {
  for (auto& o : trace.observations) o.timestamp = round_us(o.timestamp);
  std::stable_sort(trace.observations.begin(), trace.observations.end(),
                   [](const PacketObservation& a, const PacketObservation& b) {
                     return a.timestamp < b.timestamp;
                   });
}

std::string numbered(const char* stem, std::size_t i, std::size_t width = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%0*zu", stem, static_cast<int>(width), i);
  return buf;
}

// Days since 1970-01-01 to an ISO date.
std::string iso_date(std::int64_t days) {
  days += 719468;
  const std::int64_t era = (days >= 0 ? days : days - 146096) / 146097;
  const std::int64_t doe = days - era * 146097;
  const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  std::int64_t y = yoe + era * 400;
  const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const std::int64_t mp = (5 * doy + 2) / 153;
  const std::int64_t d = doy - (153 * mp + 2) / 5 + 1;
  const std::int64_t m = mp < 10 ? mp + 3 : mp - 9;
  if (m <= 2) ++y;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04lld-%02lld-%02lld", static_cast<long long>(y),
                static_cast<long long>(m), static_cast<long long>(d));
  return buf;
}

Ipv4Address addr(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) {
  return Ipv4Address((a << 24) | (b << 16) | (c << 8) | d);
}

}  // namespace

double Rng::log_uniform(double lo, double hi) {
  return std::exp(uniform(std::log(lo), std::log(hi)));
}

TrafficScenario shared_guard(TrafficScenario base, double capacity_share, double capacity_jitter) {
  const double mean_base = base.constant_rate ? *base.constant_rate
                                              : 0.5 * (base.base_rate_min + base.base_rate_max);
  const double mean_jitter = base.jitter_high > base.jitter_low
                                 ? (base.jitter_high - base.jitter_low) /
                                       std::log(base.jitter_high / base.jitter_low)
                                 : base.jitter_low;
  BottleneckGroup g;
  g.side = BottleneckSide::kGuard;
  g.flows.resize(base.n_pairs);
  std::iota(g.flows.begin(), g.flows.end(), std::size_t{0});
  g.capacity = capacity_share * static_cast<double>(base.n_pairs) * mean_base * mean_jitter;
  g.capacity_jitter = capacity_jitter;
  base.bottlenecks = {g};
  return base;
}

TrafficDataset gen_traffic(const TrafficScenario& s) {
  if (s.n_pairs == 0) invalid("n_pairs must be positive");
  if (!(s.duration > 0) || !(s.tick > 0) || s.mss == 0) invalid("duration, tick and mss must be positive");
  if (!(s.base_rate_min > 0) || s.base_rate_max < s.base_rate_min) invalid("bad base rate range");
  if (s.constant_rate && !(*s.constant_rate > 0)) invalid("constant_rate must be positive");
  if (!(s.jitter_low > 0) || s.jitter_high < s.jitter_low) invalid("bad jitter range");
  if (s.latency_min < 0 || s.latency_max < s.latency_min) invalid("bad latency range");
  if (s.ack_delay < 0 || s.packet_jitter < 0 || s.start_spread < 0) invalid("negative delay");
  if (s.start_spread >= s.duration) invalid("start_spread must be shorter than duration");
  {
    std::set<std::size_t> seen[2];
    for (const auto& g : s.bottlenecks) {
      if (!(g.capacity > 0)) invalid("bottleneck capacity must be positive");
      if (!(g.capacity_jitter > 0) || g.capacity_jitter > 1) invalid("capacity_jitter must be in (0,1]");
      for (std::size_t f : g.flows) {
        if (f >= s.n_pairs) invalid("bottleneck flow index out of range");
        if (!seen[static_cast<int>(g.side)].insert(f).second) {
          invalid("flow in more than one bottleneck on the same side");
        }
      }
    }
  }

  const std::size_t n = s.n_pairs;
  const auto seconds = static_cast<std::size_t>(std::ceil(s.duration)) + 1;
  Rng rng(s.seed);
  Rng capacity_rng(s.seed ^ 0x9e3779b97f4a7c15ULL);

  struct Flow {
    double start, base, latency, server_rtt, guard_rtt;
    std::uint32_t c_isn, g_isn, x_isn, s_isn;
    std::uint16_t c_port, x_port;
    std::vector<double> jitter;
  };
  std::vector<Flow> flows(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& f = flows[i];
    f.start = rng.uniform(0.0, s.start_spread);
    f.base = rng.uniform(s.base_rate_min, s.base_rate_max);
    f.latency = rng.uniform(s.latency_min, s.latency_max);
    f.server_rtt = rng.uniform(0.005, 0.03);
    f.guard_rtt = rng.uniform(0.01, 0.05);
    f.c_isn = rng.u32();
    f.g_isn = rng.u32();
    f.x_isn = rng.u32();
    f.s_isn = rng.u32();
    f.c_port = static_cast<std::uint16_t>(40000 + rng.index(20000));
    f.x_port = static_cast<std::uint16_t>(40000 + rng.index(20000));
    f.jitter.resize(seconds);
    for (auto& j : f.jitter) j = rng.log_uniform(s.jitter_low, s.jitter_high);
  }

  // Per-second rates after bottleneck sharing.
  std::vector<std::vector<double>> rate(seconds, std::vector<double>(n));
  for (std::size_t k = 0; k < seconds; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      rate[k][i] = (s.constant_rate ? *s.constant_rate : flows[i].base) *
                   (s.constant_rate ? 1.0 : flows[i].jitter[k]);
    }
    for (const auto& g : s.bottlenecks) {
      const double c = g.capacity * capacity_rng.log_uniform(g.capacity_jitter, 1.0);
      std::vector<double*> members;
      for (std::size_t f : g.flows) members.push_back(&rate[k][f]);
      water_fill(members, c);
    }
  }

  TrafficDataset out;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);  // order[j] = client index placed at server slot j
  std::vector<std::size_t> server_slot(n);
  for (std::size_t j = 0; j < n; ++j) server_slot[order[j]] = j;

  const Ipv4Address guard_addr = addr(198, 51, 100, 7);
  std::vector<EndpointTrace> servers(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& f = flows[i];
    const std::string client_id = numbered("c", i);
    const std::string server_id = numbered("s", server_slot[i]);

    // Server side: the exit opens the connection, the server streams data.
    const double syn_s = f.start + 0.02;
    const double data_start = syn_s + f.server_rtt + 1e-3;
    std::vector<Segment> sent;
    double exact = 0.0;
    std::uint64_t emitted = 0;
    std::uint64_t backlog = 0;
    // Each flow transfers for `duration` seconds from its first data byte.
    const auto ticks = std::llround(s.duration / s.tick);
    for (std::int64_t k = 0; k < ticks; ++k) {
      const double t = data_start + static_cast<double>(k) * s.tick;
      const auto sec = static_cast<std::size_t>(t);
      exact += rate[std::min(sec, seconds - 1)][i] * s.tick;
      const auto now = static_cast<std::uint64_t>(std::floor(exact + 1e-6));
      backlog += now - emitted;
      emitted = now;
      const std::uint64_t count = backlog / s.mss;
      for (std::uint64_t p = 0; p < count; ++p) {
        const double at = t + s.tick * static_cast<double>(p) / static_cast<double>(count);
        const std::uint64_t offset = sent.empty() ? 0 : sent.back().offset + sent.back().len;
        sent.push_back({at, s.mss, offset, false});
      }
      backlog -= count * s.mss;
    }
    if (backlog > 0) {
      const std::uint64_t offset = sent.empty() ? 0 : sent.back().offset + sent.back().len;
      sent.push_back({data_start + s.duration, static_cast<std::uint32_t>(backlog), offset, false});
    }
    const std::uint64_t total = sent.empty() ? 0 : sent.back().offset + sent.back().len;
    if (s.loss) {
      std::vector<Segment> with_retx;
      for (const auto& seg : sent) {
        with_retx.push_back(seg);
        if (rng.chance(s.loss_rate)) {
          Segment again = seg;
          again.t += 0.2;
          again.retransmit = true;
          with_retx.push_back(again);
        }
      }
      std::stable_sort(with_retx.begin(), with_retx.end(),
                       [](const Segment& a, const Segment& b) { return a.t < b.t; });
      sent = std::move(with_retx);
    }

    EndpointTrace server;
    server.vantage_id = server_id;
    server.flow = {addr(93, 184, static_cast<std::uint32_t>(i / 250), static_cast<std::uint32_t>(1 + i % 250)), 80,
                   addr(203, 0, 113, static_cast<std::uint32_t>(1 + i % 250)), f.x_port};
    auto& so = server.observations;
    so.push_back({syn_s, Direction::kToServer, f.x_isn, 0, 0, flag::kSyn});
    so.push_back({syn_s + 1e-4, Direction::kFromServer, f.s_isn, f.x_isn + 1, 0,
                  static_cast<std::uint8_t>(flag::kSyn | flag::kAck)});
    so.push_back({syn_s + f.server_rtt, Direction::kToServer, f.x_isn + 1, f.s_isn + 1, 0, flag::kAck});
    for (const auto& seg : sent) {
      so.push_back({seg.t, Direction::kFromServer,
                    static_cast<std::uint32_t>(f.s_isn + 1 + seg.offset), f.x_isn + 1, seg.len, flag::kAck});
    }
    // The exit receives half an RTT later and its ACKs need another half.
    std::vector<Segment> at_exit = sent;
    for (auto& seg : at_exit) seg.t += f.server_rtt / 2;
    for (const auto& a : ack_schedule(at_exit, s.ack_delay, f.server_rtt / 2)) {
      so.push_back({a.t, Direction::kToServer, f.x_isn + 1,
                    static_cast<std::uint32_t>(f.s_isn + 1 + a.acked), 0, flag::kAck});
    }
    const double last_sent = sent.empty() ? data_start : sent.back().t;
    so.push_back({last_sent + 1e-3, Direction::kFromServer,
                  static_cast<std::uint32_t>(f.s_isn + 1 + total), f.x_isn + 1, 0,
                  static_cast<std::uint8_t>(flag::kFin | flag::kAck)});
    finish(server);
    servers[server_slot[i]] = std::move(server);

    // Client side: the same bytes arrive over the circuit.
    EndpointTrace client;
    client.vantage_id = client_id;
    client.flow = {addr(10, 1, static_cast<std::uint32_t>(i / 250), static_cast<std::uint32_t>(1 + i % 250)), f.c_port,
                   guard_addr, 9001};
    auto& co = client.observations;
    co.push_back({f.start, Direction::kToRelay, f.c_isn, 0, 0, flag::kSyn});
    co.push_back({f.start + f.guard_rtt, Direction::kFromRelay, f.g_isn, f.c_isn + 1, 0,
                  static_cast<std::uint8_t>(flag::kSyn | flag::kAck)});
    co.push_back({f.start + f.guard_rtt + 1e-4, Direction::kToRelay, f.c_isn + 1, f.g_isn + 1, 0, flag::kAck});
    std::vector<Segment> arrived;
    double prev = f.start + f.guard_rtt + 2e-4;
    for (const auto& seg : sent) {
      Segment a = seg;
      a.t = std::max(prev, seg.t + f.latency + rng.uniform(0.0, s.packet_jitter));
      prev = a.t;
      arrived.push_back(a);
      co.push_back({a.t, Direction::kFromRelay, static_cast<std::uint32_t>(f.g_isn + 1 + a.offset),
                    f.c_isn + 1, a.len, flag::kAck});
    }
    for (const auto& a : ack_schedule(arrived, s.ack_delay, 0.0)) {
      co.push_back({a.t, Direction::kToRelay, f.c_isn + 1,
                    static_cast<std::uint32_t>(f.g_isn + 1 + a.acked), 0, flag::kAck});
    }
    co.push_back({prev + 1e-3, Direction::kFromRelay, static_cast<std::uint32_t>(f.g_isn + 1 + total),
                  f.c_isn + 1, 0, static_cast<std::uint8_t>(flag::kFin | flag::kAck)});
    finish(client);
    out.clients.push_back(std::move(client));
    out.truth.pairing[client_id] = server_id;
    out.truth.bytes[client_id] = total;
  }
  out.servers = std::move(servers);
  return out;
}

InterceptionScenario default_interception(std::uint64_t seed) {
  TrafficScenario t;
  t.seed = seed;
  t.duration = 340.0;
  InterceptionScenario s;
  s.traffic = shared_guard(t, kSharedGuardShare, kSharedGuardJitter);
  return s;
}

CaptureInterval capture_interval(double announce_at, double propagation, double withdraw_at,
                                 double reconvergence) {
  if (propagation < 0 || reconvergence < 0) invalid("negative propagation or reconvergence");
  if (!(announce_at + propagation < withdraw_at)) {
    invalid("announce_at + propagation must precede withdraw_at");
  }
  return {announce_at + propagation, withdraw_at + reconvergence};
}

InterceptionDataset gen_interception_timeline(const InterceptionScenario& scenario) {
  InterceptionDataset out;
  out.capture = capture_interval(scenario.announce_at, scenario.propagation, scenario.withdraw_at,
                                 scenario.reconvergence);
  out.traffic = gen_traffic(scenario.traffic);
  const auto cap = out.capture;
  std::map<std::int64_t, TunnelSample> seconds;
  for (const auto& c : out.traffic.clients) {
    EndpointTrace seen;
    seen.vantage_id = c.vantage_id;
    seen.flow = c.flow;
    for (const auto& o : c.observations) {
      if (o.direction != Direction::kToRelay) continue;
      const bool intercepted = o.timestamp >= cap.start && o.timestamp < cap.end;
      auto sec = static_cast<std::int64_t>(std::floor(o.timestamp));
      auto& row = seconds[sec];
      row.second = sec;
      const std::uint64_t bytes = 52 + o.payload_len;
      if (intercepted) {
        ++row.attacker_packets;
        row.attacker_bytes += bytes;
        if (o.has(flag::kAck)) seen.observations.push_back(o);
      } else {
        ++row.good_packets;
        row.good_bytes += bytes;
      }
    }
    out.attacker_captures.push_back(std::move(seen));
  }
  for (auto& [sec, row] : seconds) {
    row.adjusted = static_cast<double>(sec) - cap.start;
    out.timeline.push_back(row);
  }
  return out;
}

std::vector<bgp::BgpUpdate> RoutingDataset::stream() const {
  std::vector<bgp::BgpUpdate> all = initial;
  all.insert(all.end(), updates.begin(), updates.end());
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.timestamp < b.timestamp;
  });
  return all;
}

RoutingDataset gen_updates(const RoutingScenario& s) {
  if (s.horizon <= s.t0) invalid("horizon must be after t0");
  auto known = [&](const std::string& id) { return s.sessions.contains(id); };
  for (const auto& r : s.initial) {
    if (!known(r.session)) invalid("initial route for unknown session " + r.session);
    if (r.path.empty()) invalid("initial route without path");
  }
  for (std::size_t i = 0; i < s.churn.size(); ++i) {
    const auto& c = s.churn[i];
    if (!known(c.session)) invalid("churn for unknown session " + c.session);
    if (c.at < s.t0 || c.at >= s.horizon) invalid("churn outside the window");
    if (i > 0 && c.at < s.churn[i - 1].at) invalid("churn schedule not time-ordered");
    if (c.path && c.path->empty()) invalid("churn announcement without path");
  }
  for (const auto& e : s.events) {
    if (e.prefixes.empty()) invalid("event without prefixes");
    if (e.duration <= 0) invalid("event duration must be positive");
    if (e.start < s.t0 || e.start + e.duration > s.horizon) invalid("event outside the window");
    for (const auto& id : e.sessions) {
      if (!known(id)) invalid("event for unknown session " + id);
    }
  }

  RoutingDataset out;
  using Key = std::pair<std::string, IpPrefix>;
  std::map<Key, std::optional<AsPath>> legit;
  std::map<Key, int> hijacked;
  auto announce = [](Timestamp t, const std::string& session, const IpPrefix& p, const AsPath& path) {
    return bgp::BgpUpdate{t, session, bgp::UpdateKind::kAnnounce, p, path};
  };
  auto withdraw = [](Timestamp t, const std::string& session, const IpPrefix& p) {
    return bgp::BgpUpdate{t, session, bgp::UpdateKind::kWithdraw, p, {}};
  };
  for (const auto& r : s.initial) {
    out.initial.push_back(announce(s.t0, r.session, r.prefix, r.path));
    legit[{r.session, r.prefix}] = r.path;
  }

  // (time, phase, index): event ends before churn before event starts at
  // equal times.
  struct Action {
    Timestamp t;
    int phase;
    std::size_t index;
    bool operator<(const Action& o) const {
      return std::tie(t, phase, index) < std::tie(o.t, o.phase, o.index);
    }
  };
  std::vector<Action> actions;
  for (std::size_t i = 0; i < s.churn.size(); ++i) actions.push_back({s.churn[i].at, 1, i});
  for (std::size_t i = 0; i < s.events.size(); ++i) {
    actions.push_back({s.events[i].start, 2, i});
    actions.push_back({s.events[i].start + s.events[i].duration, 0, i});
  }
  std::sort(actions.begin(), actions.end());

  auto sessions_of = [&](const InjectedEvent& e) {
    std::vector<std::string> ids = e.sessions;
    if (ids.empty()) {
      for (const auto& [id, asn] : s.sessions) ids.push_back(id);
    }
    return ids;
  };
  auto attack_path = [&](const std::string& session, Asn attacker) {
    return AsPath({s.sessions.at(session), attacker});
  };

  for (const auto& a : actions) {
    if (a.phase == 1) {
      const auto& c = s.churn[a.index];
      const Key key{c.session, c.prefix};
      legit[key] = c.path;
      if (hijacked[key] > 0) continue;
      out.updates.push_back(c.path ? announce(c.at, c.session, c.prefix, *c.path)
                                   : withdraw(c.at, c.session, c.prefix));
      continue;
    }
    const auto& e = s.events[a.index];
    for (const auto& id : sessions_of(e)) {
      for (const auto& p : e.prefixes) {
        const Key key{id, p};
        if (a.phase == 2) {
          out.updates.push_back(announce(a.t, id, p, attack_path(id, e.attacker)));
          if (e.kind == EventKind::kHijack) ++hijacked[key];
        } else if (e.kind == EventKind::kHijack) {
          if (--hijacked[key] > 0) continue;
          auto it = legit.find(key);
          if (it != legit.end() && it->second) {
            out.updates.push_back(announce(a.t, id, p, *it->second));
          } else {
            out.updates.push_back(withdraw(a.t, id, p));
          }
        } else {
          out.updates.push_back(withdraw(a.t, id, p));
        }
      }
    }
    if (a.phase == 2) {
      for (const auto& p : e.prefixes) {
        out.truth.events.push_back({e.label, e.kind, p, e.attacker, e.start, e.start + e.duration});
      }
    }
  }

  if (s.compromise_truth) {
    out.truth.compromised =
        enumerate_compromise(out.stream(), s.relays, s.sessions, s.t0, s.horizon, s.compromise);
  }
  return out;
}

std::vector<hijack::HijackEvent> known_events(const RoutingTruth& truth) {
  std::vector<hijack::HijackEvent> events;
  std::map<std::string, std::size_t> by_label;
  for (const auto& e : truth.events) {
    auto [it, inserted] = by_label.try_emplace(e.label, events.size());
    if (inserted) events.push_back({e.label, {}, {e.start, e.end}});
    auto& ev = events[it->second];
    ev.prefixes.push_back(e.prefix);
    ev.window.start = std::min(ev.window.start, e.start);
    ev.window.end = std::max(ev.window.end, e.end);
  }
  return events;
}

PrefixTable<Asn> origin_map(const RoutingScenario& scenario) {
  PrefixTable<Asn> table;
  for (const auto& r : scenario.initial) {
    if (!table.find(r.prefix)) table.insert(r.prefix, *r.path.origin());
  }
  return table;
}

std::vector<churn::CircuitCompromiseRecord> enumerate_compromise(
    std::span<const bgp::BgpUpdate> stream, const std::vector<RelayDescriptor>& relays,
    const std::map<std::string, Asn>& sessions, Timestamp t0, Timestamp horizon,
    const churn::CompromiseOptions& options) {
  struct Addr {
    Ipv4Address a;
    bool guard = false;
    bool exit = false;
  };
  std::map<Ipv4Address, Addr> by_addr;
  for (const auto& r : relays) {
    if (!r.admitted()) continue;
    auto& x = by_addr[r.address];
    x.a = r.address;
    x.guard |= r.is_guard;
    x.exit |= r.is_exit;
  }
  std::vector<Addr> addrs;
  for (const auto& [k, v] : by_addr) addrs.push_back(v);

  std::vector<std::string> ids;
  std::set<std::string> id_set;
  for (const auto& u : stream) id_set.insert(u.session);
  for (const auto& [id, asn] : sessions) id_set.insert(id);
  ids.assign(id_set.begin(), id_set.end());
  std::map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < ids.size(); ++i) slot[ids[i]] = i;

  std::vector<std::map<IpPrefix, AsPath>> state(ids.size());
  using Key = std::tuple<std::size_t, std::size_t, std::size_t, std::size_t, Asn>;
  std::map<Key, Timestamp> seconds;
  std::size_t next = 0;
  for (Timestamp t = t0; t < horizon; ++t) {
    while (next < stream.size() && stream[next].timestamp <= t) {
      const auto& u = stream[next++];
      auto& table = state[slot[u.session]];
      if (u.kind == bgp::UpdateKind::kAnnounce) {
        table[u.prefix] = u.path;
      } else {
        table.erase(u.prefix);
      }
    }
    if (t < t0) continue;
    // paths[s][r]: route from session s to relay r.
    std::vector<std::vector<const AsPath*>> paths(ids.size(), std::vector<const AsPath*>(addrs.size()));
    for (std::size_t si = 0; si < ids.size(); ++si) {
      for (std::size_t r = 0; r < addrs.size(); ++r) {
        int best = -1;
        for (const auto& [p, path] : state[si]) {
          if (p.covers(addrs[r].a) && p.length() > best) {
            best = p.length();
            paths[si][r] = &path;
          }
        }
      }
    }
    for (std::size_t si = 0; si < ids.size(); ++si) {
      for (std::size_t sj = 0; sj < ids.size(); ++sj) {
        if (si == sj) continue;
        if (options.require_distinct_as) {
          auto a = sessions.find(ids[si]);
          auto b = sessions.find(ids[sj]);
          if (a != sessions.end() && b != sessions.end() && a->second == b->second) continue;
        }
        for (std::size_t g = 0; g < addrs.size(); ++g) {
          if (!addrs[g].guard || !paths[si][g]) continue;
          for (std::size_t e = 0; e < addrs.size(); ++e) {
            if (e == g || !addrs[e].exit || !paths[sj][e]) continue;
            for (Asn x : paths[si][g]->ases()) {
              if (paths[sj][e]->contains(x)) ++seconds[{si, sj, g, e, x}];
            }
          }
        }
      }
    }
  }
  std::vector<churn::CircuitCompromiseRecord> out;
  for (const auto& [key, n] : seconds) {
    if (n <= 0 || n < options.min_overlap) continue;
    const auto& [si, sj, g, e, x] = key;
    out.push_back({ids[si], ids[sj], addrs[g].a, addrs[e].a, x, n});
  }
  std::sort(out.begin(), out.end());
  return out;
}

RoutingScenario random_churn_fixture(std::uint64_t seed, std::size_t max_updates) {
  Rng rng(seed);
  RoutingScenario s;
  s.seed = seed;
  s.t0 = 0;
  s.horizon = 600;
  const std::vector<Asn> pool{1, 2, 3, 4, 5};
  const auto n_sessions = static_cast<std::size_t>(rng.integer(2, 5));
  for (std::size_t i = 0; i < n_sessions; ++i) {
    s.sessions[numbered("s", i, 1)] = pool[rng.index(pool.size())];
  }
  const auto n_relays = static_cast<std::size_t>(rng.integer(2, 10));
  std::vector<IpPrefix> prefixes;
  for (std::uint32_t b = 0; b < 2; ++b) {
    prefixes.emplace_back(addr(45, b, 0, 0), 16);
    prefixes.emplace_back(addr(45, b, 0, 0), 24);
    prefixes.emplace_back(addr(45, b, 1, 0), 24);
  }
  prefixes.emplace_back(addr(99, 0, 0, 0), 16);  // holds no relay
  for (std::size_t i = 0; i < n_relays; ++i) {
    RelayDescriptor r;
    r.address = addr(45, static_cast<std::uint32_t>(rng.index(2)), static_cast<std::uint32_t>(rng.index(2)),
                     static_cast<std::uint32_t>(10 + i));
    const auto kind = rng.index(3);
    r.is_guard = kind != 1;
    r.is_exit = kind != 0;
    r.bandwidth = static_cast<double>(rng.integer(1, 100));
    r.nickname = numbered("relay", i);
    s.relays.push_back(r);
  }
  auto random_path = [&](const std::string& session) {
    std::vector<Asn> ases{s.sessions.at(session)};
    const auto extra = rng.index(3);
    for (std::uint64_t k = 0; k < extra; ++k) ases.push_back(pool[rng.index(pool.size())]);
    return AsPath(ases);
  };
  for (const auto& [id, asn] : s.sessions) {
    for (const auto& p : prefixes) {
      if (p.length() == 16 && rng.chance(0.8)) s.initial.push_back({id, p, random_path(id)});
    }
  }
  const auto n_updates = static_cast<std::size_t>(rng.index(max_updates + 1));
  std::vector<Timestamp> times;
  for (std::size_t i = 0; i < n_updates; ++i) times.push_back(rng.integer(s.t0, s.horizon - 1));
  std::sort(times.begin(), times.end());
  std::vector<std::string> ids;
  for (const auto& [id, asn] : s.sessions) ids.push_back(id);
  for (Timestamp t : times) {
    ChurnEvent c;
    c.at = t;
    c.session = ids[rng.index(ids.size())];
    c.prefix = prefixes[rng.index(prefixes.size())];
    if (!rng.chance(0.25)) c.path = random_path(c.session);
    s.churn.push_back(c);
  }
  s.compromise_truth = true;
  return s;
}

RoutingScenario hijack_suite(std::uint64_t seed) {
  Rng rng(seed);
  RoutingScenario s;
  s.seed = seed;
  s.t0 = 1420070400;
  s.horizon = s.t0 + 86400;
  const std::vector<Asn> locals{3356, 1299, 174, 2914, 6453};
  for (std::size_t i = 0; i < locals.size(); ++i) s.sessions[numbered("rrc0", i, 1) + "-peer"] = locals[i];
  std::vector<std::string> ids;
  for (const auto& [id, asn] : s.sessions) ids.push_back(id);

  constexpr std::size_t kPrefixes = 40;
  std::vector<IpPrefix> prefixes;
  for (std::uint32_t k = 0; k < kPrefixes; ++k) {
    prefixes.emplace_back(addr(45, k, 0, 0), 22);
    RelayDescriptor g{addr(45, k, 1, 10), true, k % 3 == 0, static_cast<double>(rng.integer(100, 5000)),
                      numbered("guard", k)};
    RelayDescriptor e{addr(45, k, 2, 20), false, true, static_cast<double>(rng.integer(100, 5000)),
                      numbered("exit", k)};
    s.relays.push_back(g);
    s.relays.push_back(e);
  }
  auto transit_path = [&](Asn local, Asn origin) {
    const Asn a = 7000 + static_cast<Asn>(rng.index(20));
    Asn b = 7000 + static_cast<Asn>(rng.index(20));
    if (b == a) b = 7000 + (b - 7000 + 1) % 20;
    return AsPath({local, a, b, origin});
  };
  for (std::size_t k = 0; k < kPrefixes; ++k) {
    for (const auto& id : ids) {
      s.initial.push_back({id, prefixes[k], transit_path(s.sessions.at(id), 20000 + static_cast<Asn>(k))});
    }
  }
  std::vector<std::size_t> order(kPrefixes);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);

  auto random_sessions = [&]() {
    std::vector<std::string> chosen;
    for (const auto& id : ids) {
      if (rng.chance(0.6)) chosen.push_back(id);
    }
    if (chosen.empty()) chosen.push_back(ids[rng.index(ids.size())]);
    return chosen;
  };
  const Timestamp early = s.t0 + 3600;
  const Timestamp late = s.horizon - 3600 - 600;
  for (std::size_t i = 0; i < 20; ++i) {
    InjectedEvent e;
    e.kind = EventKind::kHijack;
    e.label = numbered("hijack-", i);
    e.prefixes = {prefixes[order[i]]};
    e.attacker = 65000 + static_cast<Asn>(i);
    e.start = rng.integer(early, late);
    e.duration = rng.integer(60, 600);
    e.sessions = random_sessions();
    s.events.push_back(e);
  }
  for (std::size_t i = 0; i < 5; ++i) {
    const auto k = static_cast<std::uint32_t>(order[20 + i]);
    InjectedEvent e;
    e.kind = EventKind::kInterception;
    e.label = numbered("interception-", i);
    e.prefixes = {IpPrefix(addr(45, k, 1, 0), 24)};
    e.attacker = 65100 + static_cast<Asn>(i);
    e.start = rng.integer(early, late);
    e.duration = rng.integer(60, 600);
    e.sessions = random_sessions();
    s.events.push_back(e);
  }
  // Slow background churn on the untouched prefixes; every route lives at
  // least an hour.
  for (std::size_t i = 25; i < kPrefixes; ++i) {
    const auto k = order[i];
    for (const auto& id : ids) {
      if (!rng.chance(0.5)) continue;
      Timestamp t = s.t0 + rng.integer(3600, 6 * 3600);
      while (t < s.horizon - 3600) {
        s.churn.push_back({t, id, prefixes[k], transit_path(s.sessions.at(id), 20000 + static_cast<Asn>(k))});
        t += rng.integer(3 * 3600, 8 * 3600);
      }
    }
  }
  std::stable_sort(s.churn.begin(), s.churn.end(),
                   [](const ChurnEvent& a, const ChurnEvent& b) { return a.at < b.at; });
  return s;
}

IndosatShape indosat_2011() {
  IndosatShape s;
  s.label = "indosat-2011";
  return s;
}

IndosatShape indosat_2014() {
  IndosatShape s;
  s.label = "indosat-2014";
  s.burst_prefixes = 4170;
  s.guard_only = 27;
  s.exit_only = 6;
  s.both = 11;
  s.relay_prefixes = 48;
  s.background_relays = 5400;
  return s;
}

RoutingScenario indosat_scenario(const IndosatShape& shape, std::uint64_t seed) {
  const std::size_t planted = shape.guard_only + shape.exit_only + shape.both;
  if (planted == 0 || planted > 250) invalid("planted relay count must be in [1,250]");
  if (shape.relay_prefixes < planted) invalid("need one event prefix per planted relay");
  if (shape.burst_prefixes < shape.relay_prefixes) invalid("burst smaller than relay prefixes");
  if (shape.relay_prefixes - planted > planted) invalid("too many covering prefixes");
  if (shape.background_relays > 250 * 200) invalid("background too large");

  Rng rng(seed);
  RoutingScenario s;
  s.seed = seed;
  s.t0 = 1294963200;
  s.horizon = s.t0 + 4 * 3600;
  s.sessions = {{"route-views-a", 7018}, {"route-views-b", 3257}, {"route-views-c", 2497}};

  std::set<std::uint32_t> blocks;
  for (std::size_t k = 0; k < shape.background_relays; ++k) {
    const auto a = static_cast<std::uint32_t>(k / 200);
    const auto b = static_cast<std::uint32_t>(k % 200);
    const auto roll = rng.index(100);
    RelayDescriptor r{addr(45 + a / 250, a % 250, b, 10), roll < 65, roll >= 45,
                      static_cast<double>(rng.integer(10, 10000)), numbered("bg", k, 5)};
    s.relays.push_back(r);
    blocks.insert(a);
  }
  for (std::size_t j = 0; j < planted; ++j) {
    const bool guard = j < shape.guard_only || j >= shape.guard_only + shape.exit_only;
    const bool exit = j >= shape.guard_only;
    s.relays.push_back({addr(80, static_cast<std::uint32_t>(j), 0, 10), guard, exit,
                        static_cast<double>(rng.integer(10, 10000)), numbered("planted", j)});
  }
  for (const auto& [id, local] : s.sessions) {
    for (std::uint32_t a : blocks) {
      s.initial.push_back({id, IpPrefix(addr(45 + a / 250, a % 250, 0, 0), 16),
                           AsPath({local, 3491, 10000 + a})});
    }
    for (std::size_t j = 0; j < planted; ++j) {
      s.initial.push_back({id, IpPrefix(addr(80, static_cast<std::uint32_t>(j), 0, 0), 16),
                           AsPath({local, 3491, 17000 + static_cast<Asn>(j)})});
    }
  }
  InjectedEvent e;
  e.kind = EventKind::kHijack;
  e.label = shape.label;
  e.attacker = shape.attacker;
  e.start = s.t0 + 3600;
  e.duration = 1800;
  for (std::size_t j = 0; j < planted; ++j) {
    e.prefixes.emplace_back(addr(80, static_cast<std::uint32_t>(j), 0, 0), 24);
  }
  for (std::size_t j = 0; j < shape.relay_prefixes - planted; ++j) {
    e.prefixes.emplace_back(addr(80, static_cast<std::uint32_t>(j), 0, 0), 16);
  }
  for (std::size_t i = 0; e.prefixes.size() < shape.burst_prefixes; ++i) {
    e.prefixes.emplace_back(addr(120 + static_cast<std::uint32_t>(i / 65536),
                                 static_cast<std::uint32_t>((i / 256) % 256),
                                 static_cast<std::uint32_t>(i % 256), 0),
                            24);
  }
  s.events.push_back(e);
  return s;
}

TracerouteDataset gen_traceroutes(const TracerouteScenario& s) {
  if (s.clients == 0 || s.guards == 0 || s.exits == 0 || s.dests == 0 || s.days == 0) {
    invalid("probe sets and days must be non-empty");
  }
  if (s.tier1 == 0 || s.tier2 < 2 || s.hosting == 0) invalid("topology too small");
  Rng rng(s.seed);
  TracerouteDataset out;

  // AS numbering and address blocks.
  std::vector<Asn> all_ases;
  auto make = [&](Asn base, std::size_t count) {
    std::vector<Asn> v;
    for (std::size_t i = 0; i < count; ++i) {
      v.push_back(base + static_cast<Asn>(i));
      all_ases.push_back(v.back());
    }
    return v;
  };
  const auto t1 = make(1000, s.tier1);
  const auto t2 = make(2000, s.tier2);
  const auto hosting = make(3000, s.hosting);
  const auto client_as = make(4000, s.clients);
  const auto dest_as = make(5000, s.dests);
  std::map<Asn, std::uint32_t> block;
  for (std::size_t i = 0; i < all_ases.size(); ++i) {
    const std::uint32_t base = (20u << 24) + static_cast<std::uint32_t>(i) * 65536u;
    block[all_ases[i]] = base;
    out.mapping.insert(IpPrefix(Ipv4Address(base), 16), all_ases[i]);
  }
  std::map<Asn, std::vector<Asn>> providers;
  auto pick_two = [&](const std::vector<Asn>& from) {
    const Asn a = from[rng.index(from.size())];
    Asn b = from[rng.index(from.size())];
    if (from.size() > 1) {
      while (b == a) b = from[rng.index(from.size())];
    }
    return std::vector<Asn>{a, b};
  };
  for (Asn a : t2) providers[a] = pick_two(t1);
  for (const auto* group : {&hosting, &client_as, &dest_as}) {
    for (Asn a : *group) providers[a] = pick_two(t2);
  }

  struct Endpoint {
    std::string id;
    Asn as;
    Ipv4Address address;
  };
  auto endpoints = [&](const char* stem, std::size_t count, std::function<Asn(std::size_t)> as_of) {
    std::vector<Endpoint> v;
    for (std::size_t i = 0; i < count; ++i) {
      const Asn a = as_of(i);
      v.push_back({numbered(stem, i), a,
                   Ipv4Address(block[a] + 256u + static_cast<std::uint32_t>(rng.index(60000)))});
      out.endpoint_as[v.back().id] = a;
    }
    return v;
  };
  const auto clients = endpoints("client-", s.clients, [&](std::size_t i) { return client_as[i]; });
  const auto guards = endpoints("guard-", s.guards, [&](std::size_t) { return hosting[rng.index(hosting.size())]; });
  const auto exits = endpoints("exit-", s.exits, [&](std::size_t) { return hosting[rng.index(hosting.size())]; });
  const auto dests = endpoints("dest-", s.dests, [&](std::size_t i) { return dest_as[i]; });

  struct Choice {
    std::uint64_t c1, c2, c3, c4;
    bool core;
  };
  auto draw = [&]() {
    return Choice{rng.index(2), rng.index(2), rng.index(2), rng.index(2), rng.chance(s.core_share)};
  };
  auto route = [&](Asn src, Asn dst, const Choice& c) {
    std::vector<Asn> p{src};
    if (src == dst) return p;
    const Asn up_a = providers[src][c.c1];
    const Asn up_b = providers[dst][c.c2];
    p.push_back(up_a);
    if (up_a != up_b) {
      if (c.core) {
        const Asn core_a = providers[up_a][c.c3];
        const Asn core_b = providers[up_b][c.c4];
        p.push_back(core_a);
        if (core_b != core_a) p.push_back(core_b);
      }
      p.push_back(up_b);
    }
    p.push_back(dst);
    return p;
  };
  auto hops_for = [&](const std::vector<Asn>& path, const Endpoint& target) {
    std::vector<std::string> hops;
    if (rng.chance(0.5)) hops.push_back("192.168.1.1");
    for (std::size_t i = 0; i < path.size(); ++i) {
      const auto n_hops = 1 + rng.index(2);
      for (std::uint64_t h = 0; h < n_hops; ++h) {
        if (rng.chance(s.gap_rate)) {
          hops.push_back("*");
          continue;
        }
        hops.push_back(Ipv4Address(block[path[i]] + 1u + static_cast<std::uint32_t>(rng.index(65000))).to_string());
      }
    }
    hops.push_back(target.address.to_string());
    return hops;
  };

  // One forward choice and reverse policy per endpoint pair.
  struct PairState {
    Choice forward;
    Choice reverse;
    bool mirror;
  };
  struct Side {
    const std::vector<Endpoint>* near;
    const std::vector<Endpoint>* far;
    paths::PathRole fwd;
    paths::PathRole back;
    std::vector<PairState> states;
  };
  auto segment = [&](const std::vector<Endpoint>& near, const std::vector<Endpoint>& far,
                     paths::PathRole fwd, paths::PathRole back) {
    Side side{&near, &far, fwd, back, {}};
    for (std::size_t i = 0; i < near.size() * far.size(); ++i) {
      side.states.push_back({draw(), draw(), rng.chance(s.symmetric_reverse)});
    }
    return side;
  };
  auto client_side = segment(clients, guards, paths::PathRole::kP1, paths::PathRole::kP2);
  auto dest_side = segment(exits, dests, paths::PathRole::kP3, paths::PathRole::kP4);

  const std::int64_t first_day = 16495;  // 2015-03-01
  for (std::size_t d = 0; d < s.days; ++d) {
    const std::string day = iso_date(first_day + static_cast<std::int64_t>(d));
    for (auto* side : {&client_side, &dest_side}) {
      const auto& near = *side->near;
      const auto& far = *side->far;
      for (std::size_t i = 0; i < near.size(); ++i) {
        for (std::size_t j = 0; j < far.size(); ++j) {
          auto& st = side->states[i * far.size() + j];
          if (d > 0 && rng.chance(s.daily_change)) st.forward = draw();
          if (d > 0 && rng.chance(s.daily_change)) st.reverse = draw();
          const auto& a = near[i];
          const auto& b = far[j];
          // Client-side probes run from the client; destination-side ones
          // from the exit.
          const auto forward = route(a.as, b.as, st.forward);
          std::vector<Asn> reverse;
          if (st.mirror) {
            reverse.assign(forward.rbegin(), forward.rend());
          } else {
            reverse = route(b.as, a.as, st.reverse);
          }
          const bool skip_fwd = d > 0 && rng.chance(0.01);
          const bool skip_back = d > 0 && rng.chance(0.01);
          if (!skip_fwd) out.records.push_back({a.id, b.id, side->fwd, day, hops_for(forward, b)});
          if (!skip_back) out.records.push_back({b.id, a.id, side->back, day, hops_for(reverse, a)});
        }
      }
    }
  }
  return out;
}

namespace {

AsPath path_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    auto p = AsPath::parse(j.get<std::string>());
    if (!p) invalid("bad AS path " + j.get<std::string>());
    return *p;
  }
  return AsPath(j.get<std::vector<Asn>>());
}

IpPrefix prefix_from_json(const nlohmann::json& j) {
  auto p = IpPrefix::parse(j.get<std::string>());
  if (!p) invalid("bad prefix " + j.get<std::string>());
  return *p;
}

template <typename Fn>
auto guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    invalid(e.what());
  }
}

}  // namespace

TrafficScenario traffic_from_json(const nlohmann::json& j) {
  return guarded([&] {
    TrafficScenario s;
    s.seed = j.value("seed", s.seed);
    s.n_pairs = j.value("n_pairs", s.n_pairs);
    s.duration = j.value("duration", s.duration);
    s.start_spread = j.value("start_spread", s.start_spread);
    s.base_rate_min = j.value("base_rate_min", s.base_rate_min);
    s.base_rate_max = j.value("base_rate_max", s.base_rate_max);
    if (j.contains("constant_rate") && !j["constant_rate"].is_null()) {
      s.constant_rate = j["constant_rate"].get<double>();
    }
    s.jitter_low = j.value("jitter_low", s.jitter_low);
    s.jitter_high = j.value("jitter_high", s.jitter_high);
    s.ack_delay = j.value("ack_delay", s.ack_delay);
    s.mss = j.value("mss", s.mss);
    s.tick = j.value("tick", s.tick);
    s.latency_min = j.value("latency_min", s.latency_min);
    s.latency_max = j.value("latency_max", s.latency_max);
    s.packet_jitter = j.value("packet_jitter", s.packet_jitter);
    s.loss = j.value("loss", s.loss);
    s.loss_rate = j.value("loss_rate", s.loss_rate);
    if (j.contains("shared_guard")) {
      const auto& g = j["shared_guard"];
      s = shared_guard(s, g.value("capacity_share", kSharedGuardShare),
                       g.value("capacity_jitter", kSharedGuardJitter));
    }
    for (const auto& g : j.value("bottlenecks", nlohmann::json::array())) {
      BottleneckGroup b;
      const std::string side = g.value("side", std::string("guard"));
      if (side != "guard" && side != "exit") invalid("bottleneck side must be guard or exit");
      b.side = side == "guard" ? BottleneckSide::kGuard : BottleneckSide::kExit;
      b.flows = g.at("flows").get<std::vector<std::size_t>>();
      b.capacity = g.at("capacity").get<double>();
      b.capacity_jitter = g.value("capacity_jitter", 1.0);
      s.bottlenecks.push_back(b);
    }
    return s;
  });
}

nlohmann::json to_json(const TrafficScenario& s) {
  nlohmann::json j;
  j["type"] = "traffic";
  j["seed"] = s.seed;
  j["n_pairs"] = s.n_pairs;
  j["duration"] = s.duration;
  j["start_spread"] = s.start_spread;
  j["base_rate_min"] = s.base_rate_min;
  j["base_rate_max"] = s.base_rate_max;
  j["constant_rate"] = s.constant_rate ? nlohmann::json(*s.constant_rate) : nlohmann::json();
  j["jitter_low"] = s.jitter_low;
  j["jitter_high"] = s.jitter_high;
  j["ack_delay"] = s.ack_delay;
  j["mss"] = s.mss;
  j["tick"] = s.tick;
  j["latency_min"] = s.latency_min;
  j["latency_max"] = s.latency_max;
  j["packet_jitter"] = s.packet_jitter;
  j["loss"] = s.loss;
  j["loss_rate"] = s.loss_rate;
  auto groups = nlohmann::json::array();
  for (const auto& g : s.bottlenecks) {
    groups.push_back({{"side", g.side == BottleneckSide::kGuard ? "guard" : "exit"},
                      {"flows", g.flows},
                      {"capacity", g.capacity},
                      {"capacity_jitter", g.capacity_jitter}});
  }
  j["bottlenecks"] = groups;
  return j;
}

InterceptionScenario interception_from_json(const nlohmann::json& j) {
  return guarded([&] {
    InterceptionScenario s = default_interception(j.value("seed", std::uint64_t{1}));
    if (j.contains("traffic")) s.traffic = traffic_from_json(j["traffic"]);
    s.announce_at = j.value("announce_at", s.announce_at);
    s.propagation = j.value("propagation", s.propagation);
    s.withdraw_at = j.value("withdraw_at", s.withdraw_at);
    s.reconvergence = j.value("reconvergence", s.reconvergence);
    return s;
  });
}

RoutingScenario routing_from_json(const nlohmann::json& j) {
  return guarded([&] {
    RoutingScenario s;
    s.seed = j.value("seed", s.seed);
    s.t0 = j.at("t0").get<Timestamp>();
    s.horizon = j.at("horizon").get<Timestamp>();
    s.sessions = j.at("sessions").get<std::map<std::string, Asn>>();
    for (const auto& r : j.value("relays", nlohmann::json::array())) {
      auto a = Ipv4Address::parse(r.at("address").get<std::string>());
      if (!a) invalid("bad relay address");
      s.relays.push_back({*a, r.value("is_guard", false), r.value("is_exit", false),
                          r.value("bandwidth", 0.0), r.value("nickname", std::string())});
    }
    for (const auto& r : j.value("initial", nlohmann::json::array())) {
      s.initial.push_back({r.at("session").get<std::string>(), prefix_from_json(r.at("prefix")),
                           path_from_json(r.at("path"))});
    }
    for (const auto& c : j.value("churn", nlohmann::json::array())) {
      ChurnEvent e;
      e.at = c.at("at").get<Timestamp>();
      e.session = c.at("session").get<std::string>();
      e.prefix = prefix_from_json(c.at("prefix"));
      if (c.contains("path") && !c["path"].is_null()) e.path = path_from_json(c["path"]);
      s.churn.push_back(e);
    }
    for (const auto& ev : j.value("events", nlohmann::json::array())) {
      InjectedEvent e;
      const std::string kind = ev.value("kind", std::string("hijack"));
      if (kind != "hijack" && kind != "interception") invalid("event kind must be hijack or interception");
      e.kind = kind == "hijack" ? EventKind::kHijack : EventKind::kInterception;
      e.label = ev.value("label", kind);
      for (const auto& p : ev.at("prefixes")) e.prefixes.push_back(prefix_from_json(p));
      e.attacker = ev.at("attacker").get<Asn>();
      e.start = ev.at("start").get<Timestamp>();
      e.duration = ev.at("duration").get<Timestamp>();
      e.sessions = ev.value("sessions", std::vector<std::string>{});
      s.events.push_back(e);
    }
    s.compromise_truth = j.value("compromise_truth", false);
    s.compromise.min_overlap = j.value("min_overlap", s.compromise.min_overlap);
    s.compromise.require_distinct_as = j.value("require_distinct_as", true);
    return s;
  });
}

TracerouteScenario traceroutes_from_json(const nlohmann::json& j) {
  return guarded([&] {
    TracerouteScenario s;
    s.seed = j.value("seed", s.seed);
    s.clients = j.value("clients", s.clients);
    s.guards = j.value("guards", s.guards);
    s.exits = j.value("exits", s.exits);
    s.dests = j.value("dests", s.dests);
    s.days = j.value("days", s.days);
    s.tier1 = j.value("tier1", s.tier1);
    s.tier2 = j.value("tier2", s.tier2);
    s.hosting = j.value("hosting", s.hosting);
    s.core_share = j.value("core_share", s.core_share);
    s.symmetric_reverse = j.value("symmetric_reverse", s.symmetric_reverse);
    s.daily_change = j.value("daily_change", s.daily_change);
    s.gap_rate = j.value("gap_rate", s.gap_rate);
    return s;
  });
}

}  // namespace raptor::sim
