#include "raptor/paths.hpp"

#include "raptor/dataset_io.hpp"
#include "raptor/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace raptor::paths {

namespace {

using AsSet = std::vector<Asn>;  // sorted, unique

AsSet sorted_set(const std::vector<Asn>& ases) {
  AsSet out = ases;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

AsSet set_union(const AsSet& a, const AsSet& b) {
  AsSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool intersects_outside(const AsSet& a, const AsSet& b, const std::set<Asn>& excluded) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      if (!excluded.contains(*i)) return true;
      ++i;
      ++j;
    }
  }
  return false;
}

void add_common(const AsLevelPath& a, const AsLevelPath& b, const std::set<Asn>& excluded,
                std::set<Asn>& out) {
  for (Asn x : a.ases) {
    if (excluded.contains(x)) continue;
    if (std::find(b.ases.begin(), b.ases.end(), x) != b.ases.end()) out.insert(x);
  }
}

std::string format_percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

std::string_view to_string(PathRole role) {
  switch (role) {
    case PathRole::kP1: return "P1";
    case PathRole::kP2: return "P2";
    case PathRole::kP3: return "P3";
    case PathRole::kP4: return "P4";
  }
  return "?";
}

std::optional<PathRole> parse_role(std::string_view text) {
  if (text == "P1" || text == "P1_CLIENT_TO_GUARD") return PathRole::kP1;
  if (text == "P2" || text == "P2_GUARD_TO_CLIENT") return PathRole::kP2;
  if (text == "P3" || text == "P3_EXIT_TO_DEST") return PathRole::kP3;
  if (text == "P4" || text == "P4_DEST_TO_EXIT") return PathRole::kP4;
  return std::nullopt;
}

AsLevelPath resolve_traceroute(std::span<const std::string> hops, const PrefixTable<Asn>& mapping) {
  if (hops.empty()) throw Error(ErrorCode::kEmptyPath, "traceroute has no hops");
  AsLevelPath path;
  for (const auto& hop : hops) {
    if (hop == "*") {
      path.gap = true;
      continue;
    }
    auto addr = Ipv4Address::parse(hop);
    if (!addr) {
      path.gap = true;
      continue;
    }
    if (addr->is_private()) continue;
    const Asn* asn = mapping.lookup(*addr);
    if (!asn) {
      path.gap = true;
      continue;
    }
    if (std::find(path.ases.begin(), path.ases.end(), *asn) == path.ases.end()) {
      path.ases.push_back(*asn);
    }
  }
  return path;
}

AsLevelPath resolve(const TracerouteRecord& record, const PrefixTable<Asn>& mapping) {
  AsLevelPath path = resolve_traceroute(record.hops, mapping);
  path.probe = record.probe;
  path.target = record.target;
  path.role = record.role;
  path.day = record.day;
  return path;
}

std::vector<TracerouteRecord> read_traceroutes(std::istream& in) {
  std::vector<TracerouteRecord> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string& why) {
      return Error(ErrorCode::kParse, "traceroute line " + std::to_string(number) + ": " + why);
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw fail(e.what());
    }
    if (j.contains("meta")) continue;
    try {
      TracerouteRecord r;
      r.probe = j.at("probe").get<std::string>();
      r.target = j.at("target").get<std::string>();
      auto role = parse_role(j.at("role").get<std::string>());
      if (!role) throw fail("unknown role");
      r.role = *role;
      r.day = j.at("day").get<std::string>();
      r.hops = j.at("hops").get<std::vector<std::string>>();
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw fail(e.what());
    }
  }
  return out;
}

std::vector<TracerouteRecord> read_traceroutes(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_traceroutes(in);
}

void write_traceroutes(std::ostream& out, std::span<const TracerouteRecord> records) {
  for (const auto& r : records) {
    nlohmann::json j;
    j["probe"] = r.probe;
    j["target"] = r.target;
    j["role"] = std::string(to_string(r.role));
    j["day"] = r.day;
    j["hops"] = r.hops;
    out << j.dump() << '\n';
  }
}

Verdict vulnerable(const QuadPaths& paths, Mode mode, const std::set<Asn>& exclusions) {
  if (!paths.p1 || !paths.p3) throw Error(ErrorCode::kMissingPath, "P1 and P3 are required");
  Verdict v;
  add_common(*paths.p1, *paths.p3, exclusions, v.witness);
  if (mode == Mode::kAsymmetric) {
    if (!paths.p2 || !paths.p4) {
      throw Error(ErrorCode::kMissingPath, "asymmetric mode needs P2 and P4");
    }
    add_common(*paths.p1, *paths.p4, exclusions, v.witness);
    add_common(*paths.p2, *paths.p3, exclusions, v.witness);
    add_common(*paths.p2, *paths.p4, exclusions, v.witness);
  }
  v.vulnerable = !v.witness.empty();
  return v;
}

PathDataset::PathDataset(std::vector<AsLevelPath> paths) {
  std::set<std::string> days;
  std::set<std::string> sets[4];
  for (auto& p : paths) {
    days.insert(p.day);
    switch (p.role) {
      case PathRole::kP1:
        sets[0].insert(p.probe);
        sets[1].insert(p.target);
        break;
      case PathRole::kP2:
        sets[1].insert(p.probe);
        sets[0].insert(p.target);
        break;
      case PathRole::kP3:
        sets[2].insert(p.probe);
        sets[3].insert(p.target);
        break;
      case PathRole::kP4:
        sets[3].insert(p.probe);
        sets[2].insert(p.target);
        break;
    }
    Key key{p.role, p.probe, p.target};
    const std::string day = p.day;
    by_key_[key].insert_or_assign(day, std::move(p));
  }
  days_.assign(days.begin(), days.end());
  for (int i = 0; i < 4; ++i) sets_[i].assign(sets[i].begin(), sets[i].end());
}

const AsLevelPath* PathDataset::find(PathRole role, const std::string& probe,
                                     const std::string& target, const std::string& day) const {
  Key key{role, probe, target};
  auto it = by_key_.find(key);
  if (it == by_key_.end()) return nullptr;
  const auto& per_day = it->second;
  auto exact = per_day.find(day);
  if (exact != per_day.end()) return &exact->second;
  auto later = per_day.upper_bound(day);
  if (later == per_day.begin()) return nullptr;
  auto cached = inherited_.find({key, day});
  if (cached == inherited_.end()) {
    AsLevelPath copy = std::prev(later)->second;
    copy.day = day;
    copy.inherited = true;
    cached = inherited_.emplace(std::make_pair(key, day), std::move(copy)).first;
  }
  return &cached->second;
}

QuadPaths PathDataset::quad(const CircuitQuad& q, const std::string& day) const {
  return {find(PathRole::kP1, q.client, q.guard, day), find(PathRole::kP2, q.guard, q.client, day),
          find(PathRole::kP3, q.exit, q.dest, day), find(PathRole::kP4, q.dest, q.exit, day)};
}

std::vector<DayVulnerability> vulnerability_timeseries(const PathDataset& dataset,
                                                       const TimeseriesOptions& options) {
  const auto& cs = dataset.clients();
  const auto& gs = dataset.guards();
  const auto& es = dataset.exits();
  const auto& ds = dataset.dests();
  const std::size_t quads = cs.size() * gs.size() * es.size() * ds.size();
  std::vector<bool> ever(quads, false);
  std::vector<DayVulnerability> rows;

  struct Segment {
    std::optional<AsSet> forward;  // P1 or P3
    std::optional<AsSet> both;     // forward united with reverse
  };
  auto endpoint = [&](const std::string& id) -> std::optional<Asn> {
    auto it = options.endpoint_as.find(id);
    if (it == options.endpoint_as.end()) return std::nullopt;
    return it->second;
  };

  for (const auto& day : dataset.days()) {
    DayVulnerability row;
    row.day = day;
    row.quads = quads;
    auto note = [&](const AsLevelPath* p) {
      if (p && p->inherited) ++row.inherited_paths;
    };
    std::vector<Segment> client_side(cs.size() * gs.size());
    for (std::size_t c = 0; c < cs.size(); ++c) {
      for (std::size_t g = 0; g < gs.size(); ++g) {
        const auto* p1 = dataset.find(PathRole::kP1, cs[c], gs[g], day);
        const auto* p2 = dataset.find(PathRole::kP2, gs[g], cs[c], day);
        note(p1);
        note(p2);
        auto& seg = client_side[c * gs.size() + g];
        if (p1) seg.forward = sorted_set(p1->ases);
        if (p1 && p2) seg.both = set_union(*seg.forward, sorted_set(p2->ases));
      }
    }
    std::vector<Segment> dest_side(es.size() * ds.size());
    for (std::size_t e = 0; e < es.size(); ++e) {
      for (std::size_t d = 0; d < ds.size(); ++d) {
        const auto* p3 = dataset.find(PathRole::kP3, es[e], ds[d], day);
        const auto* p4 = dataset.find(PathRole::kP4, ds[d], es[e], day);
        note(p3);
        note(p4);
        auto& seg = dest_side[e * ds.size() + d];
        if (p3) seg.forward = sorted_set(p3->ases);
        if (p3 && p4) seg.both = set_union(*seg.forward, sorted_set(p4->ases));
      }
    }

    std::size_t sym = 0;
    std::size_t asym = 0;
    std::size_t cumulative = 0;
    std::size_t index = 0;
    for (std::size_t c = 0; c < cs.size(); ++c) {
      for (std::size_t g = 0; g < gs.size(); ++g) {
        const auto& left = client_side[c * gs.size() + g];
        for (std::size_t e = 0; e < es.size(); ++e) {
          for (std::size_t d = 0; d < ds.size(); ++d, ++index) {
            const auto& right = dest_side[e * ds.size() + d];
            std::set<Asn> excluded = options.exclusions;
            if (options.exclude_endpoints) {
              for (const auto* id : {&cs[c], &gs[g], &es[e], &ds[d]}) {
                if (auto a = endpoint(*id)) excluded.insert(*a);
              }
            }
            if (left.forward && right.forward &&
                intersects_outside(*left.forward, *right.forward, excluded)) {
              ++sym;
            }
            if (!left.both || !right.both) {
              ++row.missing_quads;
            } else if (intersects_outside(*left.both, *right.both, excluded)) {
              ++asym;
              ever[index] = true;
            }
            if (ever[index]) ++cumulative;
          }
        }
      }
    }
    auto pct = [&](std::size_t n) {
      return quads == 0 ? 0.0 : 100.0 * static_cast<double>(n) / static_cast<double>(quads);
    };
    row.symmetric = pct(sym);
    row.asymmetric = pct(asym);
    row.asymmetric_cumulative = pct(cumulative);
    row.symmetric_day1_fixed = rows.empty() ? row.symmetric : rows.front().symmetric_day1_fixed;
    rows.push_back(row);
  }
  return rows;
}

void write_timeseries(std::ostream& out, std::span<const DayVulnerability> rows) {
  out << "day,symmetric_day1_fixed,symmetric,asymmetric,asymmetric_cumulative,quads,"
         "missing_quads,inherited_paths\n";
  for (const auto& r : rows) {
    out << r.day << ',' << format_percent(r.symmetric_day1_fixed) << ','
        << format_percent(r.symmetric) << ',' << format_percent(r.asymmetric) << ','
        << format_percent(r.asymmetric_cumulative) << ',' << r.quads << ',' << r.missing_quads
        << ',' << r.inherited_paths << '\n';
  }
}

}  // namespace raptor::paths
