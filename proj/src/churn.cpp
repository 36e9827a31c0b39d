#include "raptor/churn.hpp"

#include "raptor/error.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <unordered_map>

namespace raptor::churn {

namespace {

struct Span {
  Timestamp start = 0;
  Timestamp end = 0;
};

// Most-specific entry over time for one relay address, as consecutive
// (interval, path) pieces clipped to [from, to).
std::vector<std::pair<Span, const AsPath*>> most_specific_pieces(
    const std::vector<std::vector<RouteEntry>>& by_length, Timestamp from, Timestamp to) {
  std::vector<Timestamp> cuts{from, to};
  for (const auto& line : by_length) {
    for (const auto& e : line) {
      const Timestamp end = e.t_end.value_or(to);
      if (e.t_start > from && e.t_start < to) cuts.push_back(e.t_start);
      if (end > from && end < to) cuts.push_back(end);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<std::pair<Span, const AsPath*>> pieces;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const Timestamp a = cuts[k];
    const AsPath* path = nullptr;
    // by_length is ordered longest prefix first.
    for (const auto& line : by_length) {
      auto pos = std::upper_bound(line.begin(), line.end(), a,
                                  [](Timestamp v, const RouteEntry& e) { return v < e.t_start; });
      if (pos != line.begin() && std::prev(pos)->live_at(a)) {
        path = &std::prev(pos)->path;
        break;
      }
    }
    if (path) pieces.push_back({{a, cuts[k + 1]}, path});
  }
  return pieces;
}

void emit_for_address(const bgp::SessionRib& rib, Ipv4Address addr, bool guard, bool exit,
                      Timestamp from, Timestamp to, std::vector<SegmentObservation>& out) {
  std::vector<std::vector<RouteEntry>> by_length;
  for (int length = 32; length >= 0; --length) {
    auto line = rib.timeline(IpPrefix(addr, length));
    if (!line.empty()) by_length.push_back(std::move(line));
  }
  if (by_length.empty()) return;

  std::map<Asn, Span> active;
  std::vector<std::pair<Asn, Span>> done;
  for (const auto& [span, path] : most_specific_pieces(by_length, from, to)) {
    for (auto it = active.begin(); it != active.end();) {
      if (it->second.end != span.start || !path->contains(it->first)) {
        done.emplace_back(it->first, it->second);
        it = active.erase(it);
      } else {
        ++it;
      }
    }
    for (Asn asn : path->ases()) {
      auto [it, inserted] = active.try_emplace(asn, span);
      if (!inserted) it->second.end = span.end;
    }
  }
  for (const auto& [asn, span] : active) done.emplace_back(asn, span);

  for (const auto& [asn, span] : done) {
    if (guard) {
      out.push_back({asn, rib.session().session_id, addr, SegmentRole::kGuard, span.start, span.end});
    }
    if (exit) {
      out.push_back({asn, rib.session().session_id, addr, SegmentRole::kExit, span.start, span.end});
    }
  }
}

// Distinct relay addresses with their flags OR-ed across relays sharing them.
std::vector<std::tuple<Ipv4Address, bool, bool>> relay_addresses(const RelayIndex& relays) {
  std::vector<std::tuple<Ipv4Address, bool, bool>> out;
  for (const auto& r : relays.all()) {
    if (!out.empty() && std::get<0>(out.back()) == r.address) {
      std::get<1>(out.back()) |= r.is_guard;
      std::get<2>(out.back()) |= r.is_exit;
    } else {
      out.emplace_back(r.address, r.is_guard, r.is_exit);
    }
  }
  return out;
}

std::vector<Span> merged(std::vector<Span> spans) {
  std::sort(spans.begin(), spans.end(),
            [](const Span& a, const Span& b) { return a.start < b.start; });
  std::vector<Span> out;
  for (const auto& s : spans) {
    if (!out.empty() && s.start <= out.back().end) {
      out.back().end = std::max(out.back().end, s.end);
    } else {
      out.push_back(s);
    }
  }
  return out;
}

Timestamp intersection_length(const std::vector<Span>& a, const std::vector<Span>& b) {
  Timestamp total = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    const Timestamp lo = std::max(a[i].start, b[j].start);
    const Timestamp hi = std::min(a[i].end, b[j].end);
    if (hi > lo) total += hi - lo;
    if (a[i].end < b[j].end) {
      ++i;
    } else {
      ++j;
    }
  }
  return total;
}

}  // namespace

std::vector<SegmentObservation> segment_observations(
    const std::map<std::string, bgp::SessionRib>& ribs, const RelayIndex& relays,
    Timestamp window_start, Timestamp horizon) {
  std::vector<SegmentObservation> out;
  if (horizon <= window_start) return out;
  const auto addresses = relay_addresses(relays);
  for (const auto& [id, rib] : ribs) {
    for (const auto& [addr, guard, exit] : addresses) {
      emit_for_address(rib, addr, guard, exit, window_start, horizon, out);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<SegmentObservation> snapshot_observations(
    const std::map<std::string, bgp::SessionRib>& ribs, const RelayIndex& relays, Timestamp t) {
  std::vector<SegmentObservation> out;
  const auto addresses = relay_addresses(relays);
  for (const auto& [id, rib] : ribs) {
    for (const auto& [addr, guard, exit] : addresses) {
      auto route = rib.route_for_relay(addr, t);
      if (!route) continue;
      for (Asn asn : route->path.ases()) {
        if (guard) out.push_back({asn, id, addr, SegmentRole::kGuard, t, t + 1});
        if (exit) out.push_back({asn, id, addr, SegmentRole::kExit, t, t + 1});
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<CircuitCompromiseRecord> compromised_circuits(
    std::span<const SegmentObservation> observations,
    const std::map<std::string, Asn>& local_as, const CompromiseOptions& options) {
  if (options.min_overlap < 0) {
    throw Error(ErrorCode::kInvalidArgument, "min_overlap must be non-negative");
  }
  using Key = std::pair<std::string, Ipv4Address>;  // (session, relay)
  struct Sides {
    std::map<Key, std::vector<Span>> guards;
    std::map<Key, std::vector<Span>> exits;
  };
  std::map<Asn, Sides> index;
  for (const auto& o : observations) {
    if (o.t_end <= o.t_start) continue;
    auto& sides = index[o.as_number];
    auto& bucket = o.role == SegmentRole::kGuard ? sides.guards : sides.exits;
    bucket[{o.session, o.relay}].push_back({o.t_start, o.t_end});
  }

  auto as_of = [&](const std::string& session) -> std::optional<Asn> {
    auto it = local_as.find(session);
    if (it == local_as.end()) return std::nullopt;
    return it->second;
  };

  std::vector<CircuitCompromiseRecord> records;
  for (auto& [asn, sides] : index) {
    for (auto& [key, spans] : sides.guards) spans = merged(std::move(spans));
    for (auto& [key, spans] : sides.exits) spans = merged(std::move(spans));
    for (const auto& [gkey, gspans] : sides.guards) {
      for (const auto& [ekey, espans] : sides.exits) {
        if (gkey.first == ekey.first || gkey.second == ekey.second) continue;
        if (options.require_distinct_as) {
          auto a = as_of(gkey.first);
          auto b = as_of(ekey.first);
          if (a && b && *a == *b) continue;
        }
        const Timestamp overlap = intersection_length(gspans, espans);
        if (overlap > 0 && overlap >= options.min_overlap) {
          records.push_back({gkey.first, ekey.first, gkey.second, ekey.second, asn, overlap});
        }
      }
    }
  }
  std::sort(records.begin(), records.end());
  return records;
}

std::size_t CompromiseSummary::count(const SessionPair& pair) const {
  auto it = compromised.find(pair);
  return it == compromised.end() ? 0 : it->second.size();
}

double CompromiseSummary::percent(const SessionPair& pair) const {
  if (total_circuits == 0) return 0.0;
  return 100.0 * static_cast<double>(count(pair)) / static_cast<double>(total_circuits);
}

double CompromiseSummary::weighted_percent(const SessionPair& pair) const {
  double total = 0.0;
  for (const auto& [g, wg] : guard_weight) {
    for (const auto& [e, we] : exit_weight) {
      if (g != e) total += wg * we;
    }
  }
  if (total <= 0.0) return 0.0;
  double hit = 0.0;
  if (auto it = compromised.find(pair); it != compromised.end()) {
    for (const auto& [g, e] : it->second) hit += guard_weight.at(g) * exit_weight.at(e);
  }
  return 100.0 * hit / total;
}

std::size_t CompromiseSummary::compromisable_pairs() const {
  std::size_t n = 0;
  for (const auto& [pair, circuits] : compromised) n += circuits.empty() ? 0 : 1;
  return n;
}

std::vector<SessionPair> session_pairs(const std::map<std::string, Asn>& local_as,
                                       bool require_distinct_as) {
  std::vector<SessionPair> pairs;
  for (const auto& [src, src_as] : local_as) {
    for (const auto& [dst, dst_as] : local_as) {
      if (src == dst) continue;
      if (require_distinct_as && src_as == dst_as) continue;
      pairs.emplace_back(src, dst);
    }
  }
  return pairs;
}

std::size_t circuit_universe_size(const RelayIndex& relays) {
  const auto guards = relays.guard_addresses();
  const auto exits = relays.exit_addresses();
  std::size_t both = 0;
  for (const auto& g : guards) {
    if (std::binary_search(exits.begin(), exits.end(), g)) ++both;
  }
  return guards.size() * exits.size() - both;
}

CompromiseSummary summarize(std::span<const CircuitCompromiseRecord> records,
                            const std::map<std::string, Asn>& local_as,
                            const RelayIndex& relays, bool require_distinct_as) {
  CompromiseSummary summary;
  summary.total_circuits = circuit_universe_size(relays);
  for (const auto& r : relays.all()) {
    if (r.is_guard) summary.guard_weight[r.address] += r.bandwidth;
    if (r.is_exit) summary.exit_weight[r.address] += r.bandwidth;
  }
  for (const auto& pair : session_pairs(local_as, require_distinct_as)) {
    summary.compromised[pair];
  }
  for (const auto& rec : records) {
    const SessionPair pair{rec.src_session, rec.dst_session};
    auto it = summary.compromised.find(pair);
    // Records outside the universe (unknown sessions) are ignored.
    if (it == summary.compromised.end()) continue;
    it->second.emplace(rec.guard, rec.exit);
    summary.per_as[rec.as_number].emplace(rec.guard, rec.exit);
  }
  return summary;
}

CompromiseSummary static_baseline(const std::map<std::string, bgp::SessionRib>& ribs,
                                  const RelayIndex& relays,
                                  const std::map<std::string, Asn>& local_as, Timestamp t0,
                                  bool require_distinct_as) {
  const auto observations = snapshot_observations(ribs, relays, t0);
  const auto records =
      compromised_circuits(observations, local_as, {0, require_distinct_as});
  return summarize(records, local_as, relays, require_distinct_as);
}

ChurnAnalysis analyze_churn(const std::map<std::string, bgp::SessionRib>& ribs,
                            const RelayIndex& relays, const std::map<std::string, Asn>& local_as,
                            Timestamp t0, Timestamp horizon, const CompromiseOptions& options) {
  ChurnAnalysis result;
  result.baseline_records = compromised_circuits(snapshot_observations(ribs, relays, t0),
                                                 local_as, {0, options.require_distinct_as});
  result.window_records =
      compromised_circuits(segment_observations(ribs, relays, t0, horizon), local_as, options);
  result.baseline =
      summarize(result.baseline_records, local_as, relays, options.require_distinct_as);
  std::vector<CircuitCompromiseRecord> combined = result.baseline_records;
  combined.insert(combined.end(), result.window_records.begin(), result.window_records.end());
  result.with_updates = summarize(combined, local_as, relays, options.require_distinct_as);
  return result;
}

std::vector<CcdfPoint> ccdf(const CompromiseSummary& summary,
                            std::span<const SessionPair> universe, bool weighted) {
  if (universe.empty()) throw Error(ErrorCode::kEmptyInput, "no (src,dst) pairs");
  std::vector<double> shares;
  shares.reserve(universe.size());
  for (const auto& pair : universe) {
    shares.push_back(weighted ? summary.weighted_percent(pair) : summary.percent(pair));
  }
  std::sort(shares.begin(), shares.end());
  const auto n = static_cast<double>(shares.size());
  std::vector<CcdfPoint> curve;
  if (shares.front() > 0.0) curve.push_back({0.0, 100.0});
  for (std::size_t i = 0; i < shares.size(); ++i) {
    if (i > 0 && shares[i] == shares[i - 1]) continue;
    curve.push_back({shares[i], 100.0 * (n - static_cast<double>(i)) / n});
  }
  return curve;
}

double ccdf_at(std::span<const CcdfPoint> curve, double x) {
  // y at the first point whose x is >= the query; beyond the last point no
  // pair reaches the level.
  for (const auto& p : curve) {
    if (p.x_percent >= x) return p.y_percent;
  }
  return 0.0;
}

ChurnRatio churn_ratio(const CompromiseSummary& baseline, const CompromiseSummary& with_updates,
                       std::span<const SessionPair> universe) {
  ChurnRatio out;
  for (const auto& pair : universe) {
    PairRatio row{pair, baseline.count(pair), with_updates.count(pair), 1.0};
    if (row.baseline > 0) {
      row.ratio = static_cast<double>(row.with_updates) / static_cast<double>(row.baseline);
      out.ratios.push_back(row);
    } else if (row.with_updates > 0) {
      out.newly_compromisable.push_back(row);
    }
  }
  return out;
}

std::vector<CoverageRow> as_circuit_coverage(std::span<const CircuitCompromiseRecord> records,
                                             const RelayIndex& relays) {
  std::map<Asn, std::set<Circuit>> seen;
  for (const auto& r : records) seen[r.as_number].emplace(r.guard, r.exit);
  const auto total = static_cast<double>(circuit_universe_size(relays));
  std::vector<CoverageRow> rows;
  for (const auto& [asn, circuits] : seen) {
    rows.push_back({asn, circuits.size(),
                    total > 0 ? 100.0 * static_cast<double>(circuits.size()) / total : 0.0});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const CoverageRow& a, const CoverageRow& b) {
    return a.circuits > b.circuits;
  });
  return rows;
}

namespace {

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

void write_records(std::ostream& out, std::span<const CircuitCompromiseRecord> records) {
  out << "src_session,dst_session,guard,exit,asn,overlap_seconds\n";
  for (const auto& r : records) {
    out << r.src_session << ',' << r.dst_session << ',' << r.guard.to_string() << ','
        << r.exit.to_string() << ',' << r.as_number << ',' << r.overlap_seconds << '\n';
  }
}

void write_summary(std::ostream& out, const CompromiseSummary& summary,
                   std::span<const SessionPair> universe) {
  out << "src_session,dst_session,compromised,total,percent,weighted_percent\n";
  for (const auto& pair : universe) {
    out << pair.first << ',' << pair.second << ',' << summary.count(pair) << ','
        << summary.total_circuits << ',' << fixed(summary.percent(pair)) << ','
        << fixed(summary.weighted_percent(pair)) << '\n';
  }
}

void write_ccdf(std::ostream& out, std::span<const CcdfPoint> curve) {
  out << "x_percent,y_percent\n";
  for (const auto& p : curve) out << fixed(p.x_percent) << ',' << fixed(p.y_percent) << '\n';
}

void write_ratios(std::ostream& out, const ChurnRatio& ratio) {
  out << "src_session,dst_session,baseline,with_updates,ratio\n";
  for (const auto& r : ratio.ratios) {
    out << r.pair.first << ',' << r.pair.second << ',' << r.baseline << ',' << r.with_updates << ','
        << fixed(r.ratio) << '\n';
  }
  for (const auto& r : ratio.newly_compromisable) {
    out << r.pair.first << ',' << r.pair.second << ',' << r.baseline << ',' << r.with_updates
        << ",inf\n";
  }
}

void write_coverage(std::ostream& out, std::span<const CoverageRow> rows) {
  out << "rank,asn,circuits,percent\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << i + 1 << ',' << rows[i].asn << ',' << rows[i].circuits << ',' << fixed(rows[i].percent, 2)
        << '\n';
  }
}

}  // namespace raptor::churn
