// Acceptance run: one PASS/FAIL line per criterion.

#include "oracles.hpp"

#include "raptor/artifact.hpp"
#include "raptor/churn.hpp"
#include "raptor/evaluation.hpp"
#include "raptor/hijack.hpp"
#include "raptor/paths.hpp"
#include "raptor/simulation.hpp"
#include "raptor/traffic.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using namespace raptor;

namespace {

constexpr int kSeeds = 10;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

std::string spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return fmt("mean %.4f min %.4f max %.4f", mean(v), *lo, *hi);
}

Outcome spearman_oracle() {
  std::mt19937_64 rng(2024);
  double worst = 0;
  int compared = 0;
  while (compared < 1000) {
    const std::size_t n = 3 + rng() % 200;
    std::uniform_int_distribution<int> d(0, static_cast<int>(rng() % 20) + 1);
    std::vector<double> x(n), y(n);
    for (auto& v : x) v = d(rng);
    for (auto& v : y) v = d(rng);
    double got = 0;
    try {
      got = traffic::spearman(x, y);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kConstantInput) continue;
      throw;
    }
    worst = std::max(worst, std::abs(got - oracle::spearman(x, y)));
    ++compared;
  }
  return {worst <= 1e-9, fmt("1000 pairs, max |diff| %.3g", worst)};
}

Outcome attack_accuracy() {
  eval::CorrelationSetup setup;
  std::vector<double> plain, shared;
  std::size_t fp = 0;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    sim::TrafficScenario sc;
    sc.seed = static_cast<std::uint64_t>(seed);
    const auto a = eval::traffic_accuracy(sc, setup);
    plain.push_back(a.accuracy);
    fp += a.false_positives;
    const auto b = eval::traffic_accuracy(sim::shared_guard(sc, sim::kSharedGuardShare, sim::kSharedGuardJitter), setup);
    shared.push_back(b.accuracy);
  }
  const bool ok = mean(plain) >= 0.90 && fp == 0 && mean(shared) < mean(plain);
  return {ok, "unshared " + spread(plain) + fmt(", fp %zu; shared ", fp) + spread(shared)};
}

Outcome duration_curve() {
  eval::CorrelationSetup setup;
  std::vector<double> at30, at300;
  const std::vector<double> durations{30, 300};
  for (int seed = 1; seed <= kSeeds; ++seed) {
    sim::TrafficScenario sc;
    sc.seed = static_cast<std::uint64_t>(seed);
    const auto d = sim::gen_traffic(sc);
    const auto curve = eval::accuracy_vs_duration(d.clients, d.servers, d.truth.pairing, setup, durations);
    at30.push_back(curve[0].report.accuracy);
    at300.push_back(curve[1].report.accuracy);
  }
  return {mean(at300) >= mean(at30), "T=30 " + spread(at30) + "; T=300 " + spread(at300)};
}

Outcome intervals() {
  const auto a = traffic::clopper_pearson(2, 50, 0.95);
  const auto b = traffic::clopper_pearson(0, 2450, 0.95);
  const auto ra = oracle::clopper_pearson(2, 50, 0.95);
  const auto rb = oracle::clopper_pearson(0, 2450, 0.95);
  const double pp = 0.05;
  bool ok = std::abs(100 * (a.lower - ra.first)) <= pp && std::abs(100 * (a.upper - ra.second)) <= pp &&
            std::abs(100 * (b.upper - rb.second)) <= pp;
  ok = ok && 100 * a.lower >= 0.48 - pp && 100 * a.lower <= 0.49 + pp;
  ok = ok && std::abs(100 * a.upper - 13.7) <= pp && std::abs(100 * b.upper - 0.15) <= pp;
  return {ok, fmt("(2,50): %.4f%%-%.4f%%; (0,2450) upper %.4f%%", 100 * a.lower, 100 * a.upper, 100 * b.upper)};
}

struct ChurnRun {
  sim::RoutingScenario scenario;
  sim::RoutingDataset data;
  RelayIndex relays;
  churn::ChurnAnalysis analysis;
};

ChurnRun churn_run(std::uint64_t seed, std::size_t max_updates) {
  ChurnRun r;
  r.scenario = sim::random_churn_fixture(seed, max_updates);
  r.data = sim::gen_updates(r.scenario);
  r.relays = RelayIndex(r.scenario.relays);
  const auto ribs = bgp::ingest(r.data.stream(), r.relays, r.scenario.sessions);
  r.analysis = churn::analyze_churn(ribs, r.relays, r.scenario.sessions, r.scenario.t0, r.scenario.horizon);
  return r;
}

Outcome churn_oracle() {
  int equal = 0;
  std::size_t records = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto r = churn_run(seed, 50);
    const auto want = oracle::brute_force_compromise(r.data.stream(), r.scenario.relays, r.scenario.sessions,
                                                     r.scenario.t0, r.scenario.horizon, 30, true);
    if (r.analysis.window_records == want) ++equal;
    records += want.size();
  }
  return {equal == 100, fmt("%d/100 fixtures equal, %zu records", equal, records)};
}

Outcome churn_properties() {
  int unit_ratio = 0;
  int monotone = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto quiet = churn_run(5000 + seed, 0);
    const auto universe = churn::session_pairs(quiet.scenario.sessions, true);
    const auto ratio = churn::churn_ratio(quiet.analysis.baseline, quiet.analysis.with_updates, universe);
    bool ones = ratio.newly_compromisable.empty();
    for (const auto& p : ratio.ratios) ones = ones && p.ratio == 1.0;
    unit_ratio += ones;

    const auto busy = churn_run(seed, 50);
    bool grows = true;
    for (const auto& p : churn::session_pairs(busy.scenario.sessions, true)) {
      grows = grows && busy.analysis.with_updates.count(p) >= busy.analysis.baseline.count(p);
    }
    monotone += grows;
  }
  return {unit_ratio == 100 && monotone == 100,
          fmt("ratio 1.0 on %d/100 empty streams, non-decreasing on %d/100", unit_ratio, monotone)};
}

Outcome path_properties() {
  using namespace raptor::paths;
  auto lp = [](PathRole role, const char* probe, const char* target, std::vector<Asn> ases) {
    AsLevelPath p;
    p.role = role;
    p.probe = probe;
    p.target = target;
    p.day = "2015-03-01";
    p.ases = std::move(ases);
    return p;
  };
  PathDataset fig({lp(PathRole::kP1, "c", "g", {1, 2, 3}), lp(PathRole::kP2, "g", "c", {3, 4, 1}),
                   lp(PathRole::kP3, "e", "d", {5, 6, 7}), lp(PathRole::kP4, "d", "e", {7, 4, 5})});
  const auto q = fig.quad({"c", "g", "e", "d"}, "2015-03-01");
  const bool fig_ok = !vulnerable(q, Mode::kSymmetric).vulnerable && vulnerable(q, Mode::kAsymmetric).vulnerable;

  int fixtures = 0, good = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    sim::TracerouteScenario sc;
    sc.seed = seed;
    sc.clients = 4;
    sc.guards = 6;
    sc.exits = 6;
    sc.dests = 4;
    sc.days = 10;
    const auto data = sim::gen_traceroutes(sc);
    std::vector<AsLevelPath> resolved;
    for (const auto& r : data.records) resolved.push_back(resolve(r, data.mapping));
    PathDataset ds(resolved);
    bool ok = true;
    for (const auto& day : ds.days()) {
      for (const auto& c : ds.clients()) {
        for (const auto& g : ds.guards()) {
          for (const auto& e : ds.exits()) {
            for (const auto& d : ds.dests()) {
              const auto quad = ds.quad({c, g, e, d}, day);
              if (!quad.p1 || !quad.p2 || !quad.p3 || !quad.p4) continue;
              if (vulnerable(quad, Mode::kSymmetric).vulnerable && !vulnerable(quad, Mode::kAsymmetric).vulnerable) ok = false;
            }
          }
        }
      }
    }
    const auto rows = vulnerability_timeseries(ds);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      ok = ok && rows[i].symmetric <= rows[i].asymmetric;
      ok = ok && rows[i].asymmetric <= rows[i].asymmetric_cumulative;
      if (i > 0) ok = ok && rows[i].asymmetric_cumulative >= rows[i - 1].asymmetric_cumulative;
    }
    ++fixtures;
    good += ok;
  }
  return {fig_ok && good == fixtures,
          fmt("reverse-path fixture %s; properties hold on %d/%d campaigns", fig_ok ? "asymmetric-only" : "WRONG", good,
              fixtures)};
}

Outcome detection() {
  std::vector<double> recall;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    const auto sc = sim::hijack_suite(static_cast<std::uint64_t>(seed));
    const auto data = sim::gen_updates(sc);
    const auto stream = data.stream();
    const RelayIndex relays(sc.relays);
    const hijack::DetectionWindow w{sc.t0, sc.horizon};
    auto alerts = hijack::frequency_heuristic(stream, relays, w, {1e-5, false});
    for (auto more : {hijack::time_heuristic(stream, relays, w, 0.01), hijack::more_specific_monitor(stream, relays, w)}) {
      alerts.insert(alerts.end(), more.begin(), more.end());
    }
    recall.push_back(eval::detector_recall(alerts, data.truth.events).recall);
  }
  const auto sc = sim::indosat_scenario(sim::indosat_2011(), 1);
  const auto data = sim::gen_updates(sc);
  const auto rows = hijack::cross_reference(sim::known_events(data.truth), RelayIndex(sc.relays));
  const bool xref_ok = rows.size() == 1 && rows[0].relays == 5 && rows[0].guards == 1 && rows[0].exits == 4;
  const auto [lo, hi] = std::minmax_element(recall.begin(), recall.end());
  return {*lo == 1.0 && xref_ok,
          fmt("recall min %.3f max %.3f over %d seeds; 2011 burst xref %zu/%zu/%zu", *lo, *hi, kSeeds,
              rows.empty() ? 0 : rows[0].relays, rows.empty() ? 0 : rows[0].guards, rows.empty() ? 0 : rows[0].exits)};
}

Outcome prefix_lengths() {
  auto report = [](std::vector<int> lens) {
    std::vector<RelayDescriptor> relays;
    PrefixTable<Asn> origins;
    for (std::uint32_t i = 0; i < lens.size(); ++i) {
      const std::uint32_t base = (60u + i) << 24;
      origins.insert(IpPrefix(Ipv4Address(base), lens[i]), 100 + i);
      relays.push_back({Ipv4Address(base | 5u), true, false, 1, ""});
    }
    return hijack::prefix_length_vulnerability(RelayIndex(relays), origins);
  };
  const auto mixed = report({16, 18, 20, 22, 23, 12, 19, 21, 17, 24});
  const auto flat = report({24, 24, 24, 24, 24});
  return {mixed.percent_vulnerable == 90.0 && flat.percent_vulnerable == 0.0,
          fmt("mixed %.1f%%, all-/24 %.1f%%", mixed.percent_vulnerable, flat.percent_vulnerable)};
}

Outcome interception() {
  const auto cap = sim::capture_interval(20, 35, 300, 22);
  eval::CorrelationSetup setup;
  std::vector<double> acc;
  bool inside = true;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    const auto sc = sim::default_interception(static_cast<std::uint64_t>(seed));
    if (seed == 1) {
      const auto d = sim::gen_interception_timeline(sc);
      for (const auto& t : d.attacker_captures) {
        for (const auto& o : t.observations) inside = inside && o.timestamp >= 55.0 && o.timestamp < 322.0;
      }
    }
    acc.push_back(eval::interception_accuracy(sc, setup).accuracy);
  }
  const bool ok = cap.start == 55.0 && cap.end == 322.0 && inside && mean(acc) >= 0.85;
  return {ok, fmt("capture [%.0f, %.0f); ", cap.start, cap.end) + spread(acc)};
}

std::vector<fs::path> files_under(const fs::path& root) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root));
  }
  std::sort(out.begin(), out.end());
  return out;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "raptor-acceptance-determinism";
  fs::remove_all(root);
  const std::string bin = RAPTOR_BIN;
  // Each entry: output subdirectory and arguments after --output-dir.
  const std::vector<std::pair<std::string, std::string>> steps{
      {"sim_traffic", "--seed 3 simulate --preset traffic"},
      {"sim_interception", "--seed 3 simulate --preset interception"},
      {"sim_routing", "--seed 3 simulate --preset hijack-suite"},
      {"sim_indosat", "--seed 3 simulate --preset indosat-2011"},
      {"sim_churn", "--seed 3 simulate --preset churn-fixture"},
      {"sim_paths", "--seed 3 simulate --preset traceroutes"},
      {"correlate", "correlate --manifest @/sim_traffic/manifest.csv --truth @/sim_traffic/truth.json"},
      {"churn", "churn --updates @/sim_churn/updates.csv --initial @/sim_churn/initial.csv --relays "
                "@/sim_churn/relays.csv --sessions @/sim_churn/sessions.csv"},
      {"paths", "paths --traceroutes @/sim_paths/traceroutes.jsonl --mapping @/sim_paths/mapping.csv"},
      {"detect", "detect --updates @/sim_routing/updates.csv --relays @/sim_routing/relays.csv"},
      {"concentrate", "concentrate --relays @/sim_indosat/relays.csv --origins @/sim_indosat/origins.csv"},
      {"prefixlen", "prefixlen --relays @/sim_indosat/relays.csv --origins @/sim_indosat/origins.csv"},
      {"xref", "xref --events @/sim_indosat/events.csv --relays @/sim_indosat/relays.csv"},
      {"experiment", "--seed 1 experiment --name detection --seeds 2"},
  };
  std::size_t compared = 0;
  std::vector<std::string> differing;
  // Both runs analyze the first run's simulated inputs so their configs match.
  const fs::path inputs = root / "a";
  for (const char* run : {"a", "b"}) {
    const fs::path base = root / run;
    for (const auto& [dir, args] : steps) {
      std::string expanded = args;
      for (std::size_t at; (at = expanded.find('@')) != std::string::npos;) expanded.replace(at, 1, inputs.string());
      const std::string cmd = bin + " --output-dir " + (base / dir).string() + " " + expanded + " > /dev/null 2>&1";
      if (std::system(cmd.c_str()) != 0) return {false, "command failed: " + cmd};
    }
  }
  const auto a = files_under(root / "a");
  const auto b = files_under(root / "b");
  if (a != b) return {false, "runs produced different file sets"};
  for (const auto& f : a) {
    ++compared;
    if (!artifact::same_artifact(root / "a" / f, root / "b" / f)) differing.push_back(f.string());
  }
  std::string detail = fmt("%zu subcommand runs, %zu artifacts compared", steps.size(), compared);
  if (!differing.empty()) detail += ", differ: " + differing.front();
  return {differing.empty() && compared > 0, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"spearman vs rank oracle", spearman_oracle},
      {"attack accuracy, shared-guard degradation", attack_accuracy},
      {"accuracy vs duration", duration_curve},
      {"clopper-pearson intervals", intervals},
      {"churn vs brute force", churn_oracle},
      {"churn ratio and monotonicity", churn_properties},
      {"path asymmetry properties", path_properties},
      {"hijack detection recall and cross reference", detection},
      {"prefix-length vulnerability", prefix_lengths},
      {"interception timeline and accuracy", interception},
      {"determinism of every subcommand", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto started = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::printf("%s criterion %zu: %s | %s | %.2fs\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
