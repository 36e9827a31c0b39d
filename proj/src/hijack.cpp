#include "raptor/hijack.hpp"

#include "raptor/csv.hpp"
#include "raptor/dataset_io.hpp"
#include "raptor/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <tuple>

namespace raptor::hijack {

namespace {

using bgp::BgpUpdate;
using bgp::UpdateKind;

// Live intervals of every Tor-relevant route, keyed by (prefix, origin,
// path) and united across sessions.
using RouteKey = std::tuple<IpPrefix, Asn, AsPath>;

std::map<RouteKey, std::vector<Interval>> route_lifetimes(std::span<const BgpUpdate> updates,
                                                          const RelayIndex& relays,
                                                          DetectionWindow window) {
  struct Open {
    AsPath path;
    Timestamp since;
  };
  std::map<std::string, std::map<IpPrefix, Open>> live;
  std::map<RouteKey, std::vector<Interval>> spans;
  auto close = [&](const IpPrefix& prefix, const Open& o, Timestamp at) {
    const Timestamp s = std::max(o.since, window.start);
    const Timestamp e = std::min(at, window.end);
    if (e > s) spans[{prefix, *o.path.origin(), o.path}].push_back({s, e});
  };
  for (const auto& u : updates) {
    if (!relays.any_within(u.prefix)) continue;
    auto& table = live[u.session];
    auto it = table.find(u.prefix);
    if (u.kind == UpdateKind::kWithdraw) {
      if (it != table.end()) {
        close(u.prefix, it->second, u.timestamp);
        table.erase(it);
      }
      continue;
    }
    if (it != table.end()) {
      if (it->second.path == u.path) continue;
      close(u.prefix, it->second, u.timestamp);
      it->second = {u.path, u.timestamp};
    } else {
      table.emplace(u.prefix, Open{u.path, u.timestamp});
    }
  }
  for (const auto& [session, table] : live) {
    for (const auto& [prefix, o] : table) close(prefix, o, window.end);
  }
  for (auto& [key, list] : spans) list = merge_intervals(std::move(list));
  return spans;
}

std::map<std::pair<IpPrefix, Asn>, std::vector<Interval>> origin_lifetimes(
    const std::map<RouteKey, std::vector<Interval>>& routes) {
  std::map<std::pair<IpPrefix, Asn>, std::vector<Interval>> out;
  for (const auto& [key, list] : routes) {
    auto& dst = out[{std::get<0>(key), std::get<1>(key)}];
    dst.insert(dst.end(), list.begin(), list.end());
  }
  for (auto& [key, list] : out) list = merge_intervals(std::move(list));
  return out;
}

Timestamp measure(const std::vector<Interval>& merged) {
  Timestamp total = 0;
  for (const auto& i : merged) total += i.end - i.start;
  return total;
}

void annotate(HijackAlert& alert, const RelayIndex& relays) {
  for (const auto& r : relays.within(alert.prefix)) {
    if (r.is_guard && (alert.affected_guards.empty() || alert.affected_guards.back() != r.address)) {
      alert.affected_guards.push_back(r.address);
    }
    if (r.is_exit && (alert.affected_exits.empty() || alert.affected_exits.back() != r.address)) {
      alert.affected_exits.push_back(r.address);
    }
  }
}

void set_window(HijackAlert& alert, std::vector<Interval> intervals) {
  alert.intervals = merge_intervals(std::move(intervals));
  if (!alert.intervals.empty()) {
    alert.window = {alert.intervals.front().start, alert.intervals.back().end};
  }
}

void sort_alerts(std::vector<HijackAlert>& alerts) {
  std::sort(alerts.begin(), alerts.end(), [](const HijackAlert& a, const HijackAlert& b) {
    return std::tie(a.prefix, a.origin, a.heuristic) < std::tie(b.prefix, b.origin, b.heuristic);
  });
}

std::string fixed(double v, const char* format = "%.2f") {
  char buf[32];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

nlohmann::json address_list(const std::vector<Ipv4Address>& addrs) {
  auto out = nlohmann::json::array();
  for (const auto& a : addrs) out.push_back(a.to_string());
  return out;
}

}  // namespace

std::string_view to_string(Heuristic h) {
  switch (h) {
    case Heuristic::kFrequency: return "FREQUENCY";
    case Heuristic::kTime: return "TIME";
    case Heuristic::kMoreSpecific: return "MORE_SPECIFIC";
  }
  return "?";
}

std::optional<Heuristic> parse_heuristic(std::string_view text) {
  if (text == "FREQUENCY" || text == "frequency") return Heuristic::kFrequency;
  if (text == "TIME" || text == "time") return Heuristic::kTime;
  if (text == "MORE_SPECIFIC" || text == "more-specific") return Heuristic::kMoreSpecific;
  return std::nullopt;
}

std::vector<Interval> merge_intervals(std::vector<Interval> spans) {
  std::sort(spans.begin(), spans.end());
  std::vector<Interval> out;
  for (const auto& s : spans) {
    if (s.end <= s.start) continue;
    if (!out.empty() && s.start <= out.back().end) {
      out.back().end = std::max(out.back().end, s.end);
    } else {
      out.push_back(s);
    }
  }
  return out;
}

void write_alerts(std::ostream& out, std::span<const HijackAlert> alerts) {
  for (const auto& a : alerts) {
    nlohmann::json j;
    j["prefix"] = a.prefix.to_string();
    j["origin_as"] = a.origin;
    j["heuristic"] = std::string(to_string(a.heuristic));
    j["score"] = a.score;
    j["window"] = {a.window.start, a.window.end};
    auto intervals = nlohmann::json::array();
    for (const auto& i : a.intervals) intervals.push_back({i.start, i.end});
    j["intervals"] = intervals;
    j["affected_guards"] = address_list(a.affected_guards);
    j["affected_exits"] = address_list(a.affected_exits);
    if (a.incumbent) j["incumbent"] = a.incumbent->to_string();
    if (a.incumbent_origin) j["incumbent_origin"] = *a.incumbent_origin;
    out << j.dump() << '\n';
  }
}

ConcentrationRow ConcentrationReport::cumulative(std::size_t top) const {
  ConcentrationRow sum;
  for (std::size_t i = 0; i < std::min(top, rows.size()); ++i) {
    sum.relays += rows[i].relays;
    sum.percent_relays += rows[i].percent_relays;
    sum.percent_bandwidth += rows[i].percent_bandwidth;
    sum.prefix_count += rows[i].prefix_count;
  }
  return sum;
}

ConcentrationReport concentration(const RelayIndex& relays, const PrefixTable<Asn>& origin_map) {
  struct Group {
    std::size_t relays = 0;
    double bandwidth = 0.0;
    std::set<IpPrefix> prefixes;
  };
  std::map<Asn, Group> groups;
  ConcentrationReport report;
  for (const auto& r : relays.all()) {
    auto hit = origin_map.lookup_entry(r.address);
    if (!hit) {
      report.uncovered.push_back(r.address);
      continue;
    }
    auto& g = groups[*hit->second];
    ++g.relays;
    g.bandwidth += r.bandwidth;
    g.prefixes.insert(hit->first);
    ++report.covered_relays;
    report.covered_bandwidth += r.bandwidth;
  }
  for (const auto& [asn, g] : groups) {
    ConcentrationRow row;
    row.asn = asn;
    row.relays = g.relays;
    row.percent_relays =
        100.0 * static_cast<double>(g.relays) / static_cast<double>(report.covered_relays);
    row.percent_bandwidth =
        report.covered_bandwidth > 0 ? 100.0 * g.bandwidth / report.covered_bandwidth : 0.0;
    row.prefix_count = g.prefixes.size();
    report.rows.push_back(row);
  }
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const ConcentrationRow& a, const ConcentrationRow& b) {
                     return a.relays > b.relays;
                   });
  return report;
}

void write_concentration(std::ostream& out, const ConcentrationReport& report) {
  out << "rank,asn,relays,percent_relays,prefix_count,percent_bandwidth,"
         "cumulative_percent_relays,cumulative_percent_bandwidth\n";
  double cum_r = 0.0;
  double cum_b = 0.0;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& r = report.rows[i];
    cum_r += r.percent_relays;
    cum_b += r.percent_bandwidth;
    out << i + 1 << ',' << r.asn << ',' << r.relays << ',' << fixed(r.percent_relays) << ','
        << r.prefix_count << ',' << fixed(r.percent_bandwidth) << ',' << fixed(cum_r) << ','
        << fixed(cum_b) << '\n';
  }
}

std::vector<HijackEvent> read_events(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> f;
  std::vector<HijackEvent> events;
  std::map<std::string, std::size_t> by_label;
  bool first = true;
  while (reader.next(f)) {
    if (first && !f.empty() && f[0] == "prefix") {
      first = false;
      continue;
    }
    first = false;
    auto fail = [&](const std::string& why) {
      return Error(ErrorCode::kParse,
                   "events line " + std::to_string(reader.line_number()) + ": " + why);
    };
    if (f.size() != 4) throw fail("expected prefix,t_start,t_end,label");
    auto prefix = IpPrefix::parse(f[0]);
    if (!prefix) throw fail("bad prefix");
    Timestamp s = 0;
    Timestamp e = 0;
    if (std::from_chars(f[1].data(), f[1].data() + f[1].size(), s).ec != std::errc{} ||
        std::from_chars(f[2].data(), f[2].data() + f[2].size(), e).ec != std::errc{}) {
      throw fail("bad timestamp");
    }
    auto [it, inserted] = by_label.try_emplace(f[3], events.size());
    if (inserted) events.push_back({f[3], {}, {s, e}});
    auto& ev = events[it->second];
    ev.prefixes.push_back(*prefix);
    ev.window.start = std::min(ev.window.start, s);
    ev.window.end = std::max(ev.window.end, e);
  }
  return events;
}

std::vector<HijackEvent> read_events(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_events(in);
}

void write_events(std::ostream& out, std::span<const HijackEvent> events) {
  out << "prefix,t_start,t_end,label\n";
  for (const auto& ev : events) {
    for (const auto& p : ev.prefixes) {
      out << p.to_string() << ',' << ev.window.start << ',' << ev.window.end << ','
          << csv::escape(ev.label) << '\n';
    }
  }
}

std::vector<CrossReferenceRow> cross_reference(std::span<const HijackEvent> events,
                                               const RelayIndex& relays) {
  const auto all = relays.all();
  std::vector<CrossReferenceRow> rows;
  for (const auto& ev : events) {
    CrossReferenceRow row;
    row.label = ev.label;
    row.prefixes = ev.prefixes.size();
    std::set<std::size_t> hit;
    for (const auto& p : ev.prefixes) {
      auto inside = relays.within(p);
      if (!inside.empty()) ++row.relay_prefixes;
      for (const auto& r : inside) hit.insert(static_cast<std::size_t>(&r - all.data()));
    }
    row.relays = hit.size();
    for (std::size_t i : hit) {
      row.guards += all[i].is_guard ? 1 : 0;
      row.exits += all[i].is_exit ? 1 : 0;
    }
    rows.push_back(row);
  }
  return rows;
}

void write_cross_reference(std::ostream& out, std::span<const CrossReferenceRow> rows,
                           std::size_t total_relays, std::size_t total_guards,
                           std::size_t total_exits) {
  auto pct = [](std::size_t n, std::size_t d) {
    return d == 0 ? std::string("0.00") : fixed(100.0 * static_cast<double>(n) / static_cast<double>(d));
  };
  out << "label,prefixes,relay_prefixes,relays,percent_relays,guards,percent_guards,exits,"
         "percent_exits\n";
  for (const auto& r : rows) {
    out << csv::escape(r.label) << ',' << r.prefixes << ',' << r.relay_prefixes << ','
        << r.relays << ',' << pct(r.relays, total_relays) << ',' << r.guards << ','
        << pct(r.guards, total_guards) << ',' << r.exits << ',' << pct(r.exits, total_exits)
        << '\n';
  }
}

DetectionWindow span_of(std::span<const BgpUpdate> updates) {
  if (updates.empty()) return {};
  Timestamp lo = updates.front().timestamp;
  Timestamp hi = lo;
  for (const auto& u : updates) {
    lo = std::min(lo, u.timestamp);
    hi = std::max(hi, u.timestamp);
  }
  return {lo, hi + 1};
}

std::vector<HijackAlert> frequency_heuristic(std::span<const BgpUpdate> updates,
                                             const RelayIndex& relays, DetectionWindow window,
                                             const FrequencyOptions& options) {
  if (!(options.threshold > 0.0 && options.threshold < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "frequency threshold must lie in (0,1)");
  }
  std::map<std::pair<IpPrefix, Asn>, std::size_t> counts;
  std::map<IpPrefix, std::size_t> per_prefix;
  std::map<std::pair<IpPrefix, Asn>, std::vector<Interval>> seen_at;
  std::size_t total = 0;
  for (const auto& u : updates) {
    if (u.kind != UpdateKind::kAnnounce) continue;
    if (u.timestamp < window.start || u.timestamp >= window.end) continue;
    if (!relays.any_within(u.prefix)) continue;
    const std::pair key{u.prefix, *u.path.origin()};
    ++counts[key];
    ++per_prefix[u.prefix];
    ++total;
    seen_at[key].push_back({u.timestamp, u.timestamp + 1});
  }
  const auto lifetimes = origin_lifetimes(route_lifetimes(updates, relays, window));
  std::vector<HijackAlert> alerts;
  for (const auto& [key, n] : counts) {
    const double denom =
        static_cast<double>(options.global_denominator ? total : per_prefix.at(key.first));
    const double freq = static_cast<double>(n) / denom;
    if (!(freq < options.threshold)) continue;
    HijackAlert a;
    a.prefix = key.first;
    a.origin = key.second;
    a.heuristic = Heuristic::kFrequency;
    a.score = freq;
    auto life = lifetimes.find(key);
    set_window(a, life != lifetimes.end() ? life->second : seen_at.at(key));
    annotate(a, relays);
    alerts.push_back(std::move(a));
  }
  sort_alerts(alerts);
  return alerts;
}

std::vector<HijackAlert> time_heuristic(std::span<const BgpUpdate> updates,
                                        const RelayIndex& relays, DetectionWindow window,
                                        double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "time threshold must lie in (0,1)");
  }
  if (window.length() <= 0) return {};
  const auto routes = route_lifetimes(updates, relays, window);
  std::map<std::pair<IpPrefix, Asn>, HijackAlert> by_origin;
  for (const auto& [key, spans] : routes) {
    const double share =
        static_cast<double>(measure(spans)) / static_cast<double>(window.length());
    if (!(share < threshold)) continue;
    const std::pair id{std::get<0>(key), std::get<1>(key)};
    auto [it, inserted] = by_origin.try_emplace(id);
    HijackAlert& a = it->second;
    if (inserted) {
      a.prefix = id.first;
      a.origin = id.second;
      a.heuristic = Heuristic::kTime;
      a.score = share;
    }
    a.score = std::min(a.score, share);
    a.intervals.insert(a.intervals.end(), spans.begin(), spans.end());
  }
  std::vector<HijackAlert> alerts;
  for (auto& [id, a] : by_origin) {
    set_window(a, std::move(a.intervals));
    annotate(a, relays);
    alerts.push_back(std::move(a));
  }
  sort_alerts(alerts);
  return alerts;
}

std::vector<HijackAlert> more_specific_monitor(std::span<const BgpUpdate> updates,
                                               const RelayIndex& relays,
                                               DetectionWindow window) {
  struct Finding {
    IpPrefix incumbent;
    Asn incumbent_origin = 0;
    std::set<std::string> sessions;
  };
  std::map<std::string, PrefixTable<Asn>> live;
  std::map<std::pair<IpPrefix, Asn>, Finding> findings;
  for (const auto& u : updates) {
    if (!relays.any_within(u.prefix)) continue;
    auto& table = live[u.session];
    if (u.kind == UpdateKind::kWithdraw) {
      table.erase(u.prefix);
      continue;
    }
    const Asn origin = *u.path.origin();
    if (u.timestamp >= window.start && u.timestamp < window.end) {
      std::optional<std::pair<IpPrefix, Asn>> incumbent;
      table.for_each_covering(u.prefix.base(), [&](const IpPrefix& p, const Asn& o) {
        if (p.length() < u.prefix.length()) incumbent.emplace(p, o);
      });
      if (incumbent && incumbent->second != origin) {
        auto& f = findings[{u.prefix, origin}];
        if (f.sessions.empty()) {
          f.incumbent = incumbent->first;
          f.incumbent_origin = incumbent->second;
        }
        f.sessions.insert(u.session);
      }
    }
    if (Asn* current = table.find(u.prefix)) {
      *current = origin;
    } else {
      table.insert(u.prefix, origin);
    }
  }
  const auto lifetimes = origin_lifetimes(route_lifetimes(updates, relays, window));
  std::vector<HijackAlert> alerts;
  for (const auto& [key, f] : findings) {
    HijackAlert a;
    a.prefix = key.first;
    a.origin = key.second;
    a.heuristic = Heuristic::kMoreSpecific;
    a.score = static_cast<double>(f.sessions.size());
    a.incumbent = f.incumbent;
    a.incumbent_origin = f.incumbent_origin;
    if (auto life = lifetimes.find(key); life != lifetimes.end()) set_window(a, life->second);
    annotate(a, relays);
    if (a.affected_guards.empty() && a.affected_exits.empty()) continue;
    alerts.push_back(std::move(a));
  }
  sort_alerts(alerts);
  return alerts;
}

double PrefixLengthReport::percent(int length) const {
  auto it = histogram.find(length);
  if (it == histogram.end() || prefixes == 0) return 0.0;
  return 100.0 * static_cast<double>(it->second) / static_cast<double>(prefixes);
}

PrefixLengthReport prefix_length_vulnerability(const RelayIndex& relays,
                                               const PrefixTable<Asn>& origin_map) {
  PrefixLengthReport report;
  std::set<IpPrefix> hosting;
  for (const auto& r : relays.all()) {
    auto hit = origin_map.lookup_entry(r.address);
    if (!hit) {
      ++report.uncovered_relays;
      continue;
    }
    hosting.insert(hit->first);
  }
  std::size_t shorter = 0;
  for (const auto& p : hosting) {
    ++report.histogram[p.length()];
    if (p.length() < 24) ++shorter;
  }
  report.prefixes = hosting.size();
  report.percent_vulnerable =
      hosting.empty() ? 0.0
                      : 100.0 * static_cast<double>(shorter) / static_cast<double>(hosting.size());
  return report;
}

void write_prefix_lengths(std::ostream& out, const PrefixLengthReport& report) {
  out << "length,prefixes,percent\n";
  for (const auto& [length, n] : report.histogram) {
    out << length << ',' << n << ',' << fixed(report.percent(length), "%.4f") << '\n';
  }
  out << "# percent_shorter_than_24=" << fixed(report.percent_vulnerable, "%.4f")
      << " prefixes=" << report.prefixes << " uncovered_relays=" << report.uncovered_relays
      << '\n';
}

std::vector<Admissible> as_aware_select(std::span<const GuardCandidate> candidates,
                                        const ExitSegment& exit_segment) {
  if (candidates.empty()) throw Error(ErrorCode::kInvalidArgument, "no guard candidates");
  std::set<Asn> exit_ases = exit_segment.history;
  for (const auto& p : exit_segment.paths) exit_ases.insert(p.ases().begin(), p.ases().end());
  std::vector<Admissible> out;
  for (const auto& c : candidates) {
    std::set<Asn> seen = c.history;
    seen.insert(c.path.ases().begin(), c.path.ases().end());
    const bool clash = std::any_of(seen.begin(), seen.end(),
                                   [&](Asn a) { return exit_ases.contains(a); });
    if (!clash) out.push_back({c.guard, c.path.size()});
  }
  if (out.empty()) {
    throw Error(ErrorCode::kNoAdmissibleGuard, "every guard shares an AS with the exit segment");
  }
  std::sort(out.begin(), out.end(), [](const Admissible& a, const Admissible& b) {
    return std::tie(a.path_length, a.guard) < std::tie(b.path_length, b.guard);
  });
  return out;
}

std::set<Asn> observed_ases(const bgp::SessionRib& rib, Ipv4Address relay, Timestamp from,
                            Timestamp to) {
  std::vector<RouteEntry> covering;
  for (auto& e : rib.entries()) {
    if (e.prefix.covers(relay)) covering.push_back(std::move(e));
  }
  constexpr Timestamp kOpen = std::numeric_limits<Timestamp>::max();
  std::set<Asn> out;
  for (const auto& e : covering) {
    const Timestamp lo = std::max(e.t_start, from);
    const Timestamp hi = std::min(e.t_end.value_or(kOpen), to);
    if (lo >= hi) continue;
    // The entry is in use only while no longer covering prefix is live.
    std::vector<Interval> shadow;
    for (const auto& o : covering) {
      if (o.prefix.length() <= e.prefix.length()) continue;
      shadow.push_back({std::max(o.t_start, lo), std::min(o.t_end.value_or(kOpen), hi)});
    }
    Timestamp cursor = lo;
    for (const auto& s : merge_intervals(std::move(shadow))) {
      if (s.start > cursor) break;
      cursor = std::max(cursor, s.end);
    }
    if (cursor < hi) out.insert(e.path.ases().begin(), e.path.ases().end());
  }
  return out;
}

}  // namespace raptor::hijack
