#include "raptor/cli.hpp"

#include "raptor/artifact.hpp"
#include "raptor/bgp.hpp"
#include "raptor/churn.hpp"
#include "raptor/csv.hpp"
#include "raptor/dataset_io.hpp"
#include "raptor/error.hpp"
#include "raptor/evaluation.hpp"
#include "raptor/hijack.hpp"
#include "raptor/paths.hpp"
#include "raptor/simulation.hpp"
#include "raptor/trace_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>
#include <variant>

namespace raptor::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using artifact::Format;

namespace {

/// Options of one subcommand that may also come from the --config file.
/// Flags given on the command line win.
class Params {
 public:
  using Slot = std::variant<double*, std::int64_t*, std::uint64_t*, std::string*, bool*>;

  template <typename T>
  CLI::Option* add(CLI::App* app, const std::string& flag, const std::string& key, T& value,
                   const std::string& help) {
    CLI::Option* opt = nullptr;
    if constexpr (std::is_same_v<T, bool>) {
      opt = app->add_flag(flag, value, help);
    } else {
      opt = app->add_option(flag, value, help);
      opt->capture_default_str();
    }
    entries_.push_back({key, opt, Slot(&value)});
    return opt;
  }

  /// Fills unset options from `config` (section for the subcommand first,
  /// then top level).
  void resolve(const json& config, const std::string& section) {
    for (auto& e : entries_) {
      if (e.option->count() > 0) continue;
      const json* v = nullptr;
      if (config.contains(section) && config[section].is_object() && config[section].contains(e.key)) {
        v = &config[section][e.key];
      } else if (config.contains(e.key)) {
        v = &config[e.key];
      }
      if (!v) continue;
      try {
        std::visit([&](auto* p) { *p = v->get<std::remove_pointer_t<decltype(p)>>(); }, e.slot);
      } catch (const json::exception&) {
        throw Error(ErrorCode::kInvalidArgument, "config key " + e.key + " has the wrong type");
      }
      e.from_config = true;
    }
  }

  [[nodiscard]] bool given(const std::string& key) const {
    for (const auto& e : entries_) {
      if (e.key == key) return e.option->count() > 0 || e.from_config;
    }
    return false;
  }

  [[nodiscard]] json effective() const {
    json j = json::object();
    for (const auto& e : entries_) {
      std::visit([&](auto* p) { j[e.key] = *p; }, e.slot);
    }
    return j;
  }

 private:
  struct Entry {
    std::string key;
    CLI::Option* option;
    Slot slot;
    bool from_config = false;
  };
  std::vector<Entry> entries_;
};

struct Global {
  std::string output_dir = ".";
  std::uint64_t seed = 1;
  CLI::Option* seed_option = nullptr;
  std::string config_path;
  json config = json::object();
};

struct Context {
  const Global& global;
  std::string command;
  json config;
  std::ostream& out;
  std::ostream& err;

  [[nodiscard]] artifact::Meta meta(std::optional<std::uint64_t> seed = std::nullopt) const {
    artifact::Meta m;
    m.command = command;
    m.config = config;
    m.seed = seed;
    return m;
  }
  [[nodiscard]] fs::path path(const std::string& name) const { return fs::path(global.output_dir) / name; }

  void write(const std::string& name, Format format, const std::function<void(std::ostream&)>& body,
             std::optional<std::uint64_t> seed = std::nullopt) const {
    artifact::write_file(path(name), format, meta(seed), body);
    out << "wrote " << path(name).string() << '\n';
  }
};

json load_json(const fs::path& path) {
  auto in = open_input(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

std::vector<bgp::BgpUpdate> load_updates(const fs::path& path, const Context& ctx, bool& had_errors) {
  auto parsed = bgp::parse_updates(path);
  for (const auto& d : parsed.diagnostics) {
    ctx.err << path.string() << ": line " << d.line << ": " << d.message << '\n';
    had_errors = true;
  }
  return std::move(parsed.updates);
}

std::map<std::string, Asn> read_endpoints(const fs::path& path) {
  auto in = open_input(path);
  csv::Reader reader(in);
  std::vector<std::string> f;
  std::map<std::string, Asn> out;
  while (reader.next(f)) {
    if (!f.empty() && f[0] == "id") continue;
    Asn asn = 0;
    if (f.size() != 2 || std::from_chars(f[1].data(), f[1].data() + f[1].size(), asn).ec != std::errc{}) {
      throw Error(ErrorCode::kParse, path.string() + " line " + std::to_string(reader.line_number()) +
                                         ": expected id,asn");
    }
    out[f[0]] = asn;
  }
  return out;
}

// correlate ---------------------------------------------------------------

struct CorrelateArgs {
  std::string manifest;
  std::string truth;
  std::string scenario = "client-ack:server-ack";
  double bin_width = 1.0;
  double window = 300.0;
  double threshold = 0.6;
  std::int64_t max_lag = 0;
  bool cumulative = false;
  double t0 = 0.0;
};

int do_correlate(const CorrelateArgs& a, const Params& params, const Context& ctx) {
  auto scenario = traffic::Scenario::parse(a.scenario);
  if (!scenario) throw Error(ErrorCode::kInvalidArgument, "bad --scenario " + a.scenario);
  if (!(a.bin_width > 0) || !(a.window > 0)) throw Error(ErrorCode::kInvalidArgument, "bin width and window must be positive");
  const auto entries = traffic::read_manifest(a.manifest);
  std::vector<traffic::EndpointTrace> clients;
  std::vector<traffic::EndpointTrace> servers;
  for (const auto& e : entries) {
    auto trace = traffic::read_trace(e.file, e.vantage_id);
    (e.role == traffic::TraceRole::kClient ? clients : servers).push_back(std::move(trace));
  }
  if (clients.empty() || servers.empty()) {
    throw Error(ErrorCode::kEmptyInput, "manifest needs client and server traces");
  }
  eval::CorrelationSetup setup;
  setup.scenario = *scenario;
  setup.bin_width = a.bin_width;
  setup.window = a.window;
  setup.threshold = a.threshold;
  setup.correlate.max_lag_bins = static_cast<int>(a.max_lag);
  setup.correlate.cumulative = a.cumulative;
  if (params.given("t0")) setup.t0 = a.t0;
  std::map<std::string, std::string> pairing;
  if (!a.truth.empty()) pairing = traffic::read_pairing(a.truth);
  const auto run = eval::run_correlation(clients, servers, setup, a.truth.empty() ? nullptr : &pairing);
  ctx.write("correlation.csv", Format::kCsv, [&](std::ostream& o) { traffic::write_matrix(o, run.matrix); });
  ctx.write("matches.jsonl", Format::kJsonl, [&](std::ostream& o) { traffic::write_matches(o, run.matches); });
  if (run.report) {
    ctx.write("report.json", Format::kJson, [&](std::ostream& o) { traffic::write_accuracy(o, *run.report); });
    char buf[128];
    std::snprintf(buf, sizeof buf, "accuracy %.4f (%zu/%zu), false positives %zu\n", run.report->accuracy,
                  run.report->correct, run.report->clients, run.report->false_positives);
    ctx.out << buf;
  }
  return 0;
}

// churn ------------------------------------------------------------------

struct ChurnArgs {
  std::string updates;
  std::string initial;
  std::string relays;
  std::string sessions;
  std::int64_t t0 = 0;
  std::int64_t horizon = 0;
  std::int64_t min_overlap = 30;
  bool allow_same_as = false;
  bool filter_resets = false;
  bool weighted = false;
};

int do_churn(const ChurnArgs& a, const Params& params, const Context& ctx) {
  bool bad = false;
  const RelayIndex relays(read_relays(a.relays));
  auto updates = load_updates(a.updates, ctx, bad);
  std::vector<bgp::BgpUpdate> initial;
  if (!a.initial.empty()) initial = load_updates(a.initial, ctx, bad);
  if (a.filter_resets) updates = bgp::filter_session_resets(updates);

  Timestamp t0 = a.t0;
  if (!params.given("t0")) {
    t0 = std::numeric_limits<Timestamp>::max();
    for (const auto* v : {&initial, &updates}) {
      for (const auto& u : *v) t0 = std::min(t0, u.timestamp);
    }
    if (t0 == std::numeric_limits<Timestamp>::max()) t0 = 0;
  }
  Timestamp horizon = a.horizon;
  if (!params.given("horizon")) {
    horizon = t0 + 1;
    for (const auto& u : updates) horizon = std::max(horizon, u.timestamp + 1);
  }
  if (horizon <= t0) throw Error(ErrorCode::kInvalidArgument, "horizon must be after t0");
  for (auto& u : initial) u.timestamp = t0;
  for (const auto& u : updates) {
    if (u.timestamp < t0) throw Error(ErrorCode::kInvalidArgument, "update before t0");
  }
  std::vector<bgp::BgpUpdate> stream = initial;
  stream.insert(stream.end(), updates.begin(), updates.end());
  std::stable_sort(stream.begin(), stream.end(),
                   [](const auto& x, const auto& y) { return x.timestamp < y.timestamp; });

  std::map<std::string, Asn> explicit_as;
  if (!a.sessions.empty()) explicit_as = bgp::read_sessions(a.sessions);
  const auto local_as = bgp::resolve_local_as(stream, explicit_as);
  const auto ribs = bgp::ingest(stream, relays, local_as);
  churn::CompromiseOptions opts;
  opts.min_overlap = a.min_overlap;
  opts.require_distinct_as = !a.allow_same_as;
  const auto analysis = churn::analyze_churn(ribs, relays, local_as, t0, horizon, opts);
  const auto universe = churn::session_pairs(local_as, opts.require_distinct_as);

  ctx.write("baseline.csv", Format::kCsv,
            [&](std::ostream& o) { churn::write_summary(o, analysis.baseline, universe); });
  if (!universe.empty()) {
    ctx.write("ccdf_baseline.csv", Format::kCsv, [&](std::ostream& o) {
      churn::write_ccdf(o, churn::ccdf(analysis.baseline, universe, a.weighted));
    });
  }
  if (updates.empty()) {
    ctx.write("ratios.csv", Format::kCsv,
              [&](std::ostream& o) { churn::write_ratios(o, churn::ChurnRatio{}); });
    return bad ? kInputError : 0;
  }
  ctx.write("with_updates.csv", Format::kCsv,
            [&](std::ostream& o) { churn::write_summary(o, analysis.with_updates, universe); });
  if (!universe.empty()) {
    ctx.write("ccdf.csv", Format::kCsv, [&](std::ostream& o) {
      churn::write_ccdf(o, churn::ccdf(analysis.with_updates, universe, a.weighted));
    });
  }
  ctx.write("ratios.csv", Format::kCsv, [&](std::ostream& o) {
    churn::write_ratios(o, churn::churn_ratio(analysis.baseline, analysis.with_updates, universe));
  });
  std::vector<churn::CircuitCompromiseRecord> all = analysis.baseline_records;
  all.insert(all.end(), analysis.window_records.begin(), analysis.window_records.end());
  ctx.write("as_coverage.csv", Format::kCsv,
            [&](std::ostream& o) { churn::write_coverage(o, churn::as_circuit_coverage(all, relays)); });
  ctx.write("records.csv", Format::kCsv,
            [&](std::ostream& o) { churn::write_records(o, analysis.window_records); });
  return bad ? kInputError : 0;
}

// paths ------------------------------------------------------------------

struct PathsArgs {
  std::string traceroutes;
  std::string mapping;
  std::string endpoints;
  bool exclude_endpoints = false;
};

int do_paths(const PathsArgs& a, const Context& ctx) {
  const auto mapping = read_prefix_asn(a.mapping);
  const auto records = paths::read_traceroutes(a.traceroutes);
  std::vector<paths::AsLevelPath> resolved;
  for (const auto& r : records) resolved.push_back(paths::resolve(r, mapping));
  const paths::PathDataset dataset(std::move(resolved));
  paths::TimeseriesOptions opts;
  opts.exclude_endpoints = a.exclude_endpoints;
  if (!a.endpoints.empty()) opts.endpoint_as = read_endpoints(a.endpoints);
  if (a.exclude_endpoints && opts.endpoint_as.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "--exclude-endpoints needs --endpoints");
  }
  const auto rows = paths::vulnerability_timeseries(dataset, opts);
  ctx.write("vulnerability.csv", Format::kCsv, [&](std::ostream& o) { paths::write_timeseries(o, rows); });
  return 0;
}

// detect -----------------------------------------------------------------

struct DetectArgs {
  std::string updates;
  std::string relays;
  double frequency_threshold = 1e-5;
  double time_threshold = 0.01;
  bool global_denominator = false;
  std::string heuristics = "frequency,time,more-specific";
  std::int64_t window_start = 0;
  std::int64_t window_end = 0;
};

int do_detect(const DetectArgs& a, const Params& params, const Context& ctx) {
  bool bad = false;
  const RelayIndex relays(read_relays(a.relays));
  const auto updates = load_updates(a.updates, ctx, bad);
  auto window = hijack::span_of(updates);
  if (params.given("window_start")) window.start = a.window_start;
  if (params.given("window_end")) window.end = a.window_end;
  if (window.end <= window.start) throw Error(ErrorCode::kInvalidArgument, "empty detection window");
  if (!(a.time_threshold > 0 && a.time_threshold < 1)) {
    throw Error(ErrorCode::kInvalidArgument, "time threshold must be in (0,1)");
  }
  std::set<std::string> wanted;
  for (const auto& h : csv::split(a.heuristics)) {
    if (h != "frequency" && h != "time" && h != "more-specific") {
      throw Error(ErrorCode::kInvalidArgument, "unknown heuristic " + h);
    }
    wanted.insert(h);
  }
  std::vector<hijack::HijackAlert> alerts;
  auto add = [&](std::vector<hijack::HijackAlert> more) { alerts.insert(alerts.end(), more.begin(), more.end()); };
  if (wanted.contains("frequency")) {
    add(hijack::frequency_heuristic(updates, relays, window, {a.frequency_threshold, a.global_denominator}));
  }
  if (wanted.contains("time")) add(hijack::time_heuristic(updates, relays, window, a.time_threshold));
  if (wanted.contains("more-specific")) add(hijack::more_specific_monitor(updates, relays, window));
  std::stable_sort(alerts.begin(), alerts.end(), [](const auto& x, const auto& y) {
    return std::tie(x.prefix, x.origin, x.heuristic) < std::tie(y.prefix, y.origin, y.heuristic);
  });
  ctx.write("alerts.jsonl", Format::kJsonl, [&](std::ostream& o) { hijack::write_alerts(o, alerts); });
  ctx.out << alerts.size() << " alerts\n";
  return bad ? kInputError : 0;
}

// concentrate / prefixlen / xref ------------------------------------------

struct TableArgs {
  std::string relays;
  std::string origins;
  std::string events;
};

int do_concentrate(const TableArgs& a, const Context& ctx) {
  const RelayIndex relays(read_relays(a.relays));
  const auto report = hijack::concentration(relays, read_prefix_asn(a.origins));
  ctx.write("concentration.csv", Format::kCsv, [&](std::ostream& o) { hijack::write_concentration(o, report); });
  return 0;
}

int do_prefixlen(const TableArgs& a, const Context& ctx) {
  const RelayIndex relays(read_relays(a.relays));
  const auto report = hijack::prefix_length_vulnerability(relays, read_prefix_asn(a.origins));
  ctx.write("prefix_lengths.csv", Format::kCsv, [&](std::ostream& o) { hijack::write_prefix_lengths(o, report); });
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f%% of relay prefixes shorter than /24\n", report.percent_vulnerable);
  ctx.out << buf;
  return 0;
}

int do_xref(const TableArgs& a, const Context& ctx) {
  const RelayIndex relays(read_relays(a.relays));
  const auto events = hijack::read_events(a.events);
  const auto rows = hijack::cross_reference(events, relays);
  ctx.write("cross_reference.csv", Format::kCsv, [&](std::ostream& o) {
    hijack::write_cross_reference(o, rows, relays.size(), relays.guard_addresses().size(),
                                  relays.exit_addresses().size());
  });
  return 0;
}

// simulate ---------------------------------------------------------------

void write_traffic(const sim::TrafficDataset& data, const Context& ctx, std::uint64_t seed) {
  std::vector<traffic::ManifestEntry> manifest;
  auto emit = [&](const traffic::EndpointTrace& t, const std::string& dir, traffic::TraceRole role) {
    const std::string name = dir + "/" + t.vantage_id + ".jsonl";
    artifact::write_file(ctx.path(name), Format::kJsonl, ctx.meta(seed),
                         [&](std::ostream& o) { traffic::write_trace(o, t); });
    manifest.push_back({name, t.vantage_id, role});
  };
  for (const auto& t : data.clients) emit(t, "clients", traffic::TraceRole::kClient);
  for (const auto& t : data.servers) emit(t, "servers", traffic::TraceRole::kServer);
  ctx.write("manifest.csv", Format::kCsv, [&](std::ostream& o) { traffic::write_manifest(o, manifest); }, seed);
  ctx.write("truth.json", Format::kJson, [&](std::ostream& o) {
    o << json{{"pairing", data.truth.pairing}, {"bytes", data.truth.bytes}}.dump();
  }, seed);
  ctx.out << "wrote " << data.clients.size() + data.servers.size() << " traces\n";
}

void write_interception(const sim::InterceptionDataset& data, const Context& ctx, std::uint64_t seed) {
  write_traffic(data.traffic, ctx, seed);
  std::vector<traffic::ManifestEntry> manifest;
  for (const auto& t : data.attacker_captures) {
    const std::string name = "attacker/" + t.vantage_id + ".jsonl";
    artifact::write_file(ctx.path(name), Format::kJsonl, ctx.meta(seed),
                         [&](std::ostream& o) { traffic::write_trace(o, t); });
    manifest.push_back({name, t.vantage_id, traffic::TraceRole::kClient});
  }
  for (const auto& t : data.traffic.servers) {
    manifest.push_back({"servers/" + t.vantage_id + ".jsonl", t.vantage_id, traffic::TraceRole::kServer});
  }
  ctx.write("attacker_manifest.csv", Format::kCsv,
            [&](std::ostream& o) { traffic::write_manifest(o, manifest); }, seed);
  ctx.write("timeline.csv", Format::kCsv, [&](std::ostream& o) {
    o << "second,adjusted,good_packets,good_bytes,attacker_packets,attacker_bytes\n";
    char buf[160];
    for (const auto& r : data.timeline) {
      std::snprintf(buf, sizeof buf, "%lld,%.1f,%llu,%llu,%llu,%llu\n", static_cast<long long>(r.second),
                    r.adjusted, static_cast<unsigned long long>(r.good_packets),
                    static_cast<unsigned long long>(r.good_bytes),
                    static_cast<unsigned long long>(r.attacker_packets),
                    static_cast<unsigned long long>(r.attacker_bytes));
      o << buf;
    }
  }, seed);
  ctx.write("capture.json", Format::kJson, [&](std::ostream& o) {
    o << json{{"capture_start", data.capture.start}, {"capture_end", data.capture.end}}.dump();
  }, seed);
}

void write_routing(const sim::RoutingScenario& sc, const sim::RoutingDataset& data, const Context& ctx) {
  const auto seed = sc.seed;
  ctx.write("initial.csv", Format::kCsv, [&](std::ostream& o) { bgp::write_updates(o, data.initial); }, seed);
  ctx.write("updates.csv", Format::kCsv, [&](std::ostream& o) { bgp::write_updates(o, data.updates); }, seed);
  ctx.write("relays.csv", Format::kCsv, [&](std::ostream& o) { write_relays(o, sc.relays); }, seed);
  ctx.write("sessions.csv", Format::kCsv, [&](std::ostream& o) {
    o << "session,local_as\n";
    for (const auto& [id, asn] : sc.sessions) o << id << ',' << asn << '\n';
  }, seed);
  ctx.write("origins.csv", Format::kCsv,
            [&](std::ostream& o) { write_prefix_asn(o, sim::origin_map(sc)); }, seed);
  const auto events = sim::known_events(data.truth);
  ctx.write("events.csv", Format::kCsv, [&](std::ostream& o) { hijack::write_events(o, events); }, seed);
  ctx.write("truth.json", Format::kJson, [&](std::ostream& o) {
    json j;
    j["t0"] = sc.t0;
    j["horizon"] = sc.horizon;
    auto ev = json::array();
    for (const auto& e : data.truth.events) {
      ev.push_back({{"label", e.label},
                    {"kind", e.kind == sim::EventKind::kHijack ? "hijack" : "interception"},
                    {"prefix", e.prefix.to_string()},
                    {"attacker", e.attacker},
                    {"start", e.start},
                    {"end", e.end}});
    }
    j["events"] = ev;
    if (data.truth.compromised) {
      auto rec = json::array();
      for (const auto& r : *data.truth.compromised) {
        rec.push_back({r.src_session, r.dst_session, r.guard.to_string(), r.exit.to_string(), r.as_number,
                       r.overlap_seconds});
      }
      j["compromised"] = rec;
    }
    o << j.dump();
  }, seed);
}

void write_traceroutes(const sim::TracerouteDataset& data, const Context& ctx, std::uint64_t seed) {
  ctx.write("traceroutes.jsonl", Format::kJsonl,
            [&](std::ostream& o) { paths::write_traceroutes(o, data.records); }, seed);
  ctx.write("mapping.csv", Format::kCsv, [&](std::ostream& o) { write_prefix_asn(o, data.mapping); }, seed);
  ctx.write("endpoints.csv", Format::kCsv, [&](std::ostream& o) {
    o << "id,asn\n";
    for (const auto& [id, asn] : data.endpoint_as) o << id << ',' << asn << '\n';
  }, seed);
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"traffic",      "shared-guard",  "interception",
                                              "hijack-suite", "indosat-2011",  "indosat-2014",
                                              "churn-fixture", "traceroutes"};
  return names;
}

struct SimulateArgs {
  std::string scenario;
  std::string preset;
};

int do_simulate(const SimulateArgs& a, const Global& g, const Context& ctx) {
  if (a.scenario.empty() == a.preset.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "give exactly one of --scenario or --preset");
  }
  json doc = json::object();
  std::string type;
  std::string preset = a.preset;
  if (!a.scenario.empty()) {
    doc = load_json(a.scenario);
    if (!doc.is_object()) throw Error(ErrorCode::kInvalidScenario, "scenario must be a JSON object");
    if (doc.contains("preset")) preset = doc["preset"].get<std::string>();
    type = doc.value("type", std::string());
  }
  std::uint64_t seed = doc.value("seed", std::uint64_t{1});
  if (g.seed_option->count() > 0 || g.config.contains("seed")) seed = g.seed;
  doc["seed"] = seed;

  if (!preset.empty()) {
    if (preset == "traffic" || preset == "shared-guard") {
      sim::TrafficScenario sc;
      sc.seed = seed;
      if (preset == "shared-guard") sc = sim::shared_guard(sc, sim::kSharedGuardShare, sim::kSharedGuardJitter);
      write_traffic(sim::gen_traffic(sc), ctx, seed);
    } else if (preset == "interception") {
      write_interception(sim::gen_interception_timeline(sim::default_interception(seed)), ctx, seed);
    } else if (preset == "hijack-suite" || preset == "indosat-2011" || preset == "indosat-2014" ||
               preset == "churn-fixture") {
      sim::RoutingScenario sc;
      if (preset == "hijack-suite") sc = sim::hijack_suite(seed);
      if (preset == "indosat-2011") sc = sim::indosat_scenario(sim::indosat_2011(), seed);
      if (preset == "indosat-2014") sc = sim::indosat_scenario(sim::indosat_2014(), seed);
      if (preset == "churn-fixture") sc = sim::random_churn_fixture(seed);
      write_routing(sc, sim::gen_updates(sc), ctx);
    } else if (preset == "traceroutes") {
      sim::TracerouteScenario sc;
      sc.seed = seed;
      write_traceroutes(sim::gen_traceroutes(sc), ctx, seed);
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown preset " + preset);
    }
    return 0;
  }
  if (type == "traffic") {
    write_traffic(sim::gen_traffic(sim::traffic_from_json(doc)), ctx, seed);
  } else if (type == "interception") {
    auto sc = sim::interception_from_json(doc);
    sc.traffic.seed = seed;
    write_interception(sim::gen_interception_timeline(sc), ctx, seed);
  } else if (type == "routing") {
    const auto sc = sim::routing_from_json(doc);
    write_routing(sc, sim::gen_updates(sc), ctx);
  } else if (type == "traceroutes") {
    write_traceroutes(sim::gen_traceroutes(sim::traceroutes_from_json(doc)), ctx, seed);
  } else {
    throw Error(ErrorCode::kInvalidScenario, "scenario type must be traffic, interception, routing or traceroutes");
  }
  return 0;
}

// experiment -------------------------------------------------------------

struct ExperimentArgs {
  std::string name = "all";
  std::uint64_t seeds = 10;
  double threshold = 0.6;
  double bin_width = 1.0;
};

int do_experiment(const ExperimentArgs& a, const Global& g, const Context& ctx) {
  if (a.seeds == 0) throw Error(ErrorCode::kInvalidArgument, "--seeds must be positive");
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < a.seeds; ++i) seeds.push_back(g.seed + i);
  eval::CorrelationSetup setup;
  setup.threshold = a.threshold;
  setup.bin_width = a.bin_width;
  std::vector<std::string> names;
  if (a.name == "all") {
    names = eval::experiment_names();
  } else {
    names.push_back(a.name);
  }
  for (const auto& name : names) {
    auto report = eval::run_experiment(name, seeds, setup);
    const std::string file = "report_" + name + ".json";
    report.artifacts.push_back(file);
    ctx.write(file, Format::kJson, [&](std::ostream& o) { o << eval::to_json(report).dump(); }, g.seed);
    ctx.out << eval::format_table(report);
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"AS-level deanonymization analyses and their simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--output-dir", g.output_dir, "Directory for every artifact")->capture_default_str();
  g.seed_option = app.add_option("--seed", g.seed, "Base seed for simulation and experiments");
  app.add_option("--config", g.config_path, "JSON config; flags override its values");

  std::map<std::string, Params> by_command;
  CorrelateArgs corr;
  auto* c = app.add_subcommand("correlate", "Correlate client and server traces");
  by_command["correlate"].add(c, "--manifest", "manifest", corr.manifest, "Trace manifest CSV");
  by_command["correlate"].add(c, "--truth", "truth", corr.truth, "Ground-truth pairing JSON");
  by_command["correlate"].add(c, "--scenario", "scenario", corr.scenario, "Signals, e.g. client-ack:server-data");
  by_command["correlate"].add(c, "--bin-width", "bin_width", corr.bin_width, "Seconds per bin");
  by_command["correlate"].add(c, "--window", "window", corr.window, "Seconds of trace to use");
  by_command["correlate"].add(c, "--threshold", "threshold", corr.threshold, "Minimum coefficient to match");
  by_command["correlate"].add(c, "--max-lag", "max_lag", corr.max_lag, "Largest server shift in bins");
  by_command["correlate"].add(c, "--cumulative", "cumulative", corr.cumulative, "Correlate cumulative counts");
  by_command["correlate"].add(c, "--t0", "t0", corr.t0, "Common epoch (default: earliest packet)");

  ChurnArgs ch;
  auto* cc = app.add_subcommand("churn", "Circuit compromise under routing churn");
  by_command["churn"].add(cc, "--updates", "updates", ch.updates, "Update CSV");
  by_command["churn"].add(cc, "--initial", "initial", ch.initial, "Initial table in update CSV form");
  by_command["churn"].add(cc, "--relays", "relays", ch.relays, "Relay list CSV");
  by_command["churn"].add(cc, "--sessions", "sessions", ch.sessions, "session,local_as CSV");
  by_command["churn"].add(cc, "--t0", "t0", ch.t0, "Window start (default: first update)");
  by_command["churn"].add(cc, "--horizon", "horizon", ch.horizon, "Window end (default: last update + 1)");
  by_command["churn"].add(cc, "--min-overlap", "min_overlap", ch.min_overlap, "Seconds of simultaneous observation");
  by_command["churn"].add(cc, "--allow-same-as", "allow_same_as", ch.allow_same_as, "Pair sessions in the same AS");
  by_command["churn"].add(cc, "--filter-resets", "filter_resets", ch.filter_resets, "Drop session-reset bursts");
  by_command["churn"].add(cc, "--weighted", "weighted", ch.weighted, "Bandwidth-weighted CCDF");

  PathsArgs pa;
  auto* pc = app.add_subcommand("paths", "Daily path-asymmetry vulnerability");
  by_command["paths"].add(pc, "--traceroutes", "traceroutes", pa.traceroutes, "Traceroute JSONL");
  by_command["paths"].add(pc, "--mapping", "mapping", pa.mapping, "prefix,asn CSV");
  by_command["paths"].add(pc, "--endpoints", "endpoints", pa.endpoints, "id,asn CSV of endpoint hosting ASes");
  by_command["paths"].add(pc, "--exclude-endpoints", "exclude_endpoints", pa.exclude_endpoints, "Ignore endpoint ASes");

  DetectArgs de;
  auto* dc = app.add_subcommand("detect", "Hijack and interception alerts");
  by_command["detect"].add(dc, "--updates", "updates", de.updates, "Update CSV");
  by_command["detect"].add(dc, "--relays", "relays", de.relays, "Relay list CSV");
  by_command["detect"].add(dc, "--frequency-threshold", "frequency_threshold", de.frequency_threshold, "Announcement share");
  by_command["detect"].add(dc, "--time-threshold", "time_threshold", de.time_threshold, "Share of the window");
  by_command["detect"].add(dc, "--global-denominator", "global_denominator", de.global_denominator,
             "Frequency over all announcements");
  by_command["detect"].add(dc, "--heuristics", "heuristics", de.heuristics, "Comma list: frequency,time,more-specific");
  by_command["detect"].add(dc, "--window-start", "window_start", de.window_start, "Detection window start");
  by_command["detect"].add(dc, "--window-end", "window_end", de.window_end, "Detection window end");

  TableArgs co;
  auto* kc = app.add_subcommand("concentrate", "Relays per origin AS");
  by_command["concentrate"].add(kc, "--relays", "relays", co.relays, "Relay list CSV");
  by_command["concentrate"].add(kc, "--origins", "origins", co.origins, "prefix,asn CSV");
  TableArgs pl;
  auto* lc = app.add_subcommand("prefixlen", "Hosting prefix lengths");
  by_command["prefixlen"].add(lc, "--relays", "relays", pl.relays, "Relay list CSV");
  by_command["prefixlen"].add(lc, "--origins", "origins", pl.origins, "prefix,asn CSV");
  TableArgs xr;
  auto* xc = app.add_subcommand("xref", "Relays affected by known events");
  by_command["xref"].add(xc, "--events", "events", xr.events, "prefix,t_start,t_end,label CSV");
  by_command["xref"].add(xc, "--relays", "relays", xr.relays, "Relay list CSV");

  SimulateArgs si;
  auto* sc = app.add_subcommand("simulate", "Generate a ground-truth dataset");
  by_command["simulate"].add(sc, "--scenario", "scenario", si.scenario, "Scenario JSON");
  std::string presets;
  for (const auto& n : preset_names()) presets += (presets.empty() ? "" : ", ") + n;
  by_command["simulate"].add(sc, "--preset", "preset", si.preset, "One of: " + presets);

  ExperimentArgs ex;
  auto* ec = app.add_subcommand("experiment", "Seeded reproduction runs");
  std::string names = "all";
  for (const auto& n : eval::experiment_names()) names += ", " + n;
  by_command["experiment"].add(ec, "--name", "name", ex.name, "One of: " + names);
  by_command["experiment"].add(ec, "--seeds", "seeds", ex.seeds, "Number of consecutive seeds");
  by_command["experiment"].add(ec, "--threshold", "threshold", ex.threshold, "Correlation threshold");
  by_command["experiment"].add(ec, "--bin-width", "bin_width", ex.bin_width, "Seconds per bin");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kInputError;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string command = chosen->get_name();
  try {
    if (!g.config_path.empty()) {
      g.config = load_json(g.config_path);
      if (!g.config.is_object()) throw Error(ErrorCode::kParse, "config must be a JSON object");
      if (g.config.contains("output_dir") && app.get_option("--output-dir")->count() == 0) {
        g.output_dir = g.config["output_dir"].get<std::string>();
      }
      if (g.config.contains("seed") && g.seed_option->count() == 0) g.seed = g.config["seed"].get<std::uint64_t>();
    }
    auto required = [&](const std::string& value, const char* flag) {
      if (value.empty()) throw Error(ErrorCode::kInvalidArgument, std::string(flag) + " is required");
    };
    auto& params = by_command[command];
    params.resolve(g.config, command);
    json scoped = params.effective();
    if (g.seed_option->count() > 0 || g.config.contains("seed")) scoped["seed"] = g.seed;
    const Context ctx{g, command, scoped, out, err};

    if (command == "correlate") {
      required(corr.manifest, "--manifest");
      return do_correlate(corr, params, ctx);
    }
    if (command == "churn") {
      required(ch.updates, "--updates");
      required(ch.relays, "--relays");
      return do_churn(ch, params, ctx);
    }
    if (command == "paths") {
      required(pa.traceroutes, "--traceroutes");
      required(pa.mapping, "--mapping");
      return do_paths(pa, ctx);
    }
    if (command == "detect") {
      required(de.updates, "--updates");
      required(de.relays, "--relays");
      return do_detect(de, params, ctx);
    }
    if (command == "concentrate" || command == "prefixlen") {
      auto& args = command == "concentrate" ? co : pl;
      required(args.relays, "--relays");
      required(args.origins, "--origins");
      return command == "concentrate" ? do_concentrate(args, ctx) : do_prefixlen(args, ctx);
    }
    if (command == "xref") {
      required(xr.events, "--events");
      required(xr.relays, "--relays");
      return do_xref(xr, ctx);
    }
    if (command == "simulate") return do_simulate(si, g, ctx);
    return do_experiment(ex, g, ctx);
  } catch (const Error& e) {
    err << "raptor " << command << ": " << e.what() << '\n';
    return kInputError;
  } catch (const json::exception& e) {
    err << "raptor " << command << ": " << e.what() << '\n';
    return kInputError;
  } catch (const fs::filesystem_error& e) {
    err << "raptor " << command << ": " << e.what() << '\n';
    return kInputError;
  }
}

}  // namespace raptor::cli
