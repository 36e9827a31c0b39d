#include "raptor/bgp.hpp"

#include "raptor/csv.hpp"
#include "raptor/dataset_io.hpp"
#include "raptor/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <ostream>
#include <set>
#include <unordered_map>

namespace raptor::bgp {

namespace {

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  Timestamp t = 0;
  auto [next, ec] = std::from_chars(text.data(), text.data() + text.size(), t);
  if (ec != std::errc{} || next != text.data() + text.size()) return std::nullopt;
  return t;
}

}  // namespace

ParsedUpdates parse_updates(std::istream& in) {
  ParsedUpdates out;
  csv::Reader reader(in);
  std::vector<std::string> f;
  bool first = true;
  while (reader.next(f)) {
    auto diagnose = [&](std::string message) {
      out.diagnostics.push_back({reader.line_number(), std::move(message), reader.raw()});
    };
    if (first && !f.empty() && f[0] == "timestamp") {
      first = false;
      continue;
    }
    first = false;
    if (f.size() < 4 || f.size() > 5) {
      diagnose("expected timestamp,session,kind,prefix,path");
      continue;
    }
    BgpUpdate u;
    auto t = parse_timestamp(f[0]);
    if (!t) {
      diagnose("bad timestamp");
      continue;
    }
    u.timestamp = *t;
    u.session = f[1];
    if (u.session.empty()) {
      diagnose("empty session");
      continue;
    }
    if (f[2] == "A") {
      u.kind = UpdateKind::kAnnounce;
    } else if (f[2] == "W") {
      u.kind = UpdateKind::kWithdraw;
    } else {
      diagnose("kind must be A or W");
      continue;
    }
    auto prefix = IpPrefix::parse(f[3]);
    if (!prefix) {
      diagnose("bad prefix");
      continue;
    }
    u.prefix = *prefix;
    const std::string path_text = f.size() == 5 ? f[4] : std::string();
    auto path = AsPath::parse(path_text);
    if (!path) {
      diagnose("bad AS path");
      continue;
    }
    u.path = std::move(*path);
    if (u.kind == UpdateKind::kAnnounce && u.path.empty()) {
      diagnose("announcement without AS path");
      continue;
    }
    if (u.kind == UpdateKind::kWithdraw && !u.path.empty()) {
      diagnose("withdrawal must not carry an AS path");
      continue;
    }
    out.updates.push_back(std::move(u));
  }
  std::stable_sort(out.updates.begin(), out.updates.end(),
                   [](const BgpUpdate& a, const BgpUpdate& b) { return a.timestamp < b.timestamp; });
  return out;
}

ParsedUpdates parse_updates(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_updates(in);
}

void write_updates(std::ostream& out, std::span<const BgpUpdate> updates) {
  out << "timestamp,session,kind,prefix,path\n";
  for (const auto& u : updates) {
    out << u.timestamp << ',' << csv::escape(u.session) << ','
        << (u.kind == UpdateKind::kAnnounce ? 'A' : 'W') << ',' << u.prefix.to_string() << ',';
    if (u.kind == UpdateKind::kAnnounce) out << '"' << u.path.to_string() << '"';
    out << '\n';
  }
}

std::vector<BgpUpdate> filter_session_resets(std::span<const BgpUpdate> updates,
                                             const ResetFilterOptions& options) {
  struct Burst {
    Timestamp start = 0;
    std::size_t table_size = 0;
    std::map<IpPrefix, AsPath> before_gap;
    std::vector<std::size_t> repeats;
  };
  struct SessionState {
    std::map<IpPrefix, AsPath> live;
    std::optional<Timestamp> last;
    std::optional<std::size_t> open_burst;
  };
  std::unordered_map<std::string, SessionState> sessions;
  std::vector<Burst> bursts;

  for (std::size_t i = 0; i < updates.size(); ++i) {
    const auto& u = updates[i];
    auto& s = sessions[u.session];
    if (s.last && u.timestamp - *s.last >= options.quiet_gap) {
      bursts.push_back({u.timestamp, s.live.size(), s.live, {}});
      s.open_burst = bursts.size() - 1;
    }
    s.last = u.timestamp;
    if (s.open_burst && u.timestamp >= bursts[*s.open_burst].start + options.burst_window) {
      s.open_burst.reset();
    }
    if (u.kind == UpdateKind::kAnnounce) {
      if (s.open_burst) {
        const auto& snapshot = bursts[*s.open_burst].before_gap;
        auto it = snapshot.find(u.prefix);
        if (it != snapshot.end() && it->second == u.path) {
          bursts[*s.open_burst].repeats.push_back(i);
        }
      }
      s.live[u.prefix] = u.path;
    } else {
      s.live.erase(u.prefix);
    }
  }

  std::vector<bool> drop(updates.size(), false);
  for (const auto& b : bursts) {
    if (b.table_size == 0) continue;
    const double share = static_cast<double>(b.repeats.size()) / static_cast<double>(b.table_size);
    if (share < options.burst_fraction) continue;
    for (std::size_t i : b.repeats) drop[i] = true;
  }
  std::vector<BgpUpdate> kept;
  kept.reserve(updates.size());
  for (std::size_t i = 0; i < updates.size(); ++i) {
    if (!drop[i]) kept.push_back(updates[i]);
  }
  return kept;
}

void SessionRib::close(const IpPrefix& prefix, Timestamp at) {
  const RouteEntry* open = live_.find(prefix);
  if (!open) return;
  RouteEntry closed = *open;
  live_.erase(prefix);
  // Zero-length intervals (two updates in the same second) leave no trace.
  if (at > closed.t_start) {
    closed.t_end = at;
    history_[prefix].push_back(std::move(closed));
  }
}

void SessionRib::apply(const BgpUpdate& update, const RelayIndex& tor_index) {
  if (last_applied_ && update.timestamp < *last_applied_) {
    throw Error(ErrorCode::kOutOfOrder,
                "session " + session_.session_id + ": update at " +
                    std::to_string(update.timestamp) + " precedes " +
                    std::to_string(*last_applied_));
  }
  last_applied_ = update.timestamp;
  const auto role = tor_index.role_within(update.prefix);
  if (!role) return;

  if (update.kind == UpdateKind::kWithdraw) {
    close(update.prefix, update.timestamp);
    return;
  }
  if (const RouteEntry* current = live_.find(update.prefix)) {
    if (current->path == update.path) return;
  }
  close(update.prefix, update.timestamp);
  live_.insert(update.prefix,
               RouteEntry{update.timestamp, std::nullopt, update.prefix, *role, update.path});
}

std::optional<RouteEntry> SessionRib::route_for_relay(Ipv4Address relay, Timestamp t) const {
  for (int length = 32; length >= 0; --length) {
    const IpPrefix prefix(relay, length);
    if (const RouteEntry* open = live_.find(prefix); open && open->live_at(t)) return *open;
    auto it = history_.find(prefix);
    if (it == history_.end()) continue;
    const auto& closed = it->second;
    auto pos = std::upper_bound(closed.begin(), closed.end(), t,
                                [](Timestamp v, const RouteEntry& e) { return v < e.t_start; });
    if (pos != closed.begin() && std::prev(pos)->live_at(t)) return *std::prev(pos);
  }
  return std::nullopt;
}

std::vector<RouteEntry> SessionRib::timeline(const IpPrefix& prefix) const {
  std::vector<RouteEntry> out;
  if (auto it = history_.find(prefix); it != history_.end()) out = it->second;
  if (const RouteEntry* open = live_.find(prefix)) out.push_back(*open);
  return out;
}

std::vector<IpPrefix> SessionRib::tracked_prefixes() const {
  std::set<IpPrefix> prefixes;
  for (const auto& [p, _] : history_) prefixes.insert(p);
  live_.for_each([&](const IpPrefix& p, const RouteEntry&) { prefixes.insert(p); });
  return {prefixes.begin(), prefixes.end()};
}

std::vector<RouteEntry> SessionRib::entries() const {
  std::vector<RouteEntry> out;
  for (const auto& p : tracked_prefixes()) {
    auto line = timeline(p);
    out.insert(out.end(), line.begin(), line.end());
  }
  return out;
}

bool SessionRib::operator==(const SessionRib& other) const {
  return session_.session_id == other.session_.session_id &&
         session_.local_as == other.session_.local_as && history_ == other.history_ &&
         last_applied_ == other.last_applied_ && entries() == other.entries();
}

std::map<std::string, Asn> resolve_local_as(std::span<const BgpUpdate> updates,
                                            const std::map<std::string, Asn>& explicit_map) {
  std::map<std::string, Asn> out = explicit_map;
  for (const auto& u : updates) {
    if (u.kind == UpdateKind::kAnnounce && !u.path.empty() && !out.contains(u.session)) {
      out[u.session] = u.path.ases().front();
    }
  }
  return out;
}

std::map<std::string, Asn> read_sessions(const std::filesystem::path& path) {
  auto in = open_input(path);
  csv::Reader reader(in);
  std::vector<std::string> f;
  std::map<std::string, Asn> out;
  bool first = true;
  while (reader.next(f)) {
    if (first && !f.empty() && f[0] == "session") {
      first = false;
      continue;
    }
    first = false;
    Asn asn = 0;
    if (f.size() < 2 ||
        std::from_chars(f[1].data(), f[1].data() + f[1].size(), asn).ec != std::errc{}) {
      throw Error(ErrorCode::kParse, "sessions line " + std::to_string(reader.line_number()) +
                                         ": expected session,local_as");
    }
    out[f[0]] = asn;
  }
  return out;
}

std::map<std::string, SessionRib> ingest(std::span<const BgpUpdate> updates,
                                         const RelayIndex& tor_index,
                                         const std::map<std::string, Asn>& local_as) {
  const auto resolved = resolve_local_as(updates, local_as);
  std::map<std::string, SessionRib> ribs;
  for (const auto& [id, asn] : resolved) ribs.emplace(id, SessionRib(VantageSession{id, asn}));
  for (const auto& u : updates) {
    auto it = ribs.find(u.session);
    if (it == ribs.end()) {
      it = ribs.emplace(u.session, SessionRib(VantageSession{u.session, 0})).first;
    }
    it->second.apply(u, tor_index);
  }
  return ribs;
}

}  // namespace raptor::bgp
