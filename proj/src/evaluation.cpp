#include "raptor/evaluation.hpp"

#include "raptor/bgp.hpp"
#include "raptor/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace raptor::eval {

using traffic::AccuracyReport;
using traffic::ByteProgressSeries;
using traffic::EndpointTrace;

double common_t0(std::span<const EndpointTrace> clients, std::span<const EndpointTrace> servers) {
  double t0 = std::numeric_limits<double>::infinity();
  for (const auto* side : {&clients, &servers}) {
    for (const auto& t : *side) {
      if (!t.observations.empty()) t0 = std::min(t0, t.observations.front().timestamp);
    }
  }
  if (!std::isfinite(t0)) throw Error(ErrorCode::kEmptyInput, "no observations");
  return t0;
}

std::vector<ByteProgressSeries> progress_series(std::span<const EndpointTrace> traces,
                                                traffic::SignalKind kind, double bin_width,
                                                double window, double t0) {
  traffic::ProgressOptions opts;
  opts.kind = kind;
  opts.bin_width = bin_width;
  opts.window = window;
  opts.t0 = t0;
  std::vector<ByteProgressSeries> out;
  out.reserve(traces.size());
  for (const auto& t : traces) out.push_back(traffic::extract_progress(t, opts));
  return out;
}

namespace {

std::vector<std::string> ids_of(std::span<const EndpointTrace> traces) {
  std::vector<std::string> ids;
  for (const auto& t : traces) ids.push_back(t.vantage_id);
  return ids;
}

CorrelationRun correlate_series(std::span<const ByteProgressSeries> c,
                                std::span<const ByteProgressSeries> s,
                                std::vector<std::string> c_ids, std::vector<std::string> s_ids,
                                const CorrelationSetup& setup,
                                const std::map<std::string, std::string>* truth) {
  CorrelationRun run;
  run.matrix = traffic::correlate_all(c, s, setup.correlate, std::move(c_ids), std::move(s_ids));
  run.matches = traffic::match(run.matrix, setup.threshold, setup.scenario);
  if (truth) run.report = traffic::evaluate(run.matches, *truth);
  return run;
}

}  // namespace

CorrelationRun run_correlation(std::span<const EndpointTrace> clients,
                               std::span<const EndpointTrace> servers,
                               const CorrelationSetup& setup,
                               const std::map<std::string, std::string>* truth) {
  const double t0 = setup.t0 ? *setup.t0 : common_t0(clients, servers);
  const auto c = progress_series(clients, setup.scenario.client, setup.bin_width, setup.window, t0);
  const auto s = progress_series(servers, setup.scenario.server, setup.bin_width, setup.window, t0);
  return correlate_series(c, s, ids_of(clients), ids_of(servers), setup, truth);
}

std::vector<double> default_durations() { return {10, 30, 60, 120, 300}; }

std::vector<CurvePoint> accuracy_vs_duration(std::span<const EndpointTrace> clients,
                                             std::span<const EndpointTrace> servers,
                                             const std::map<std::string, std::string>& truth,
                                             const CorrelationSetup& setup,
                                             std::span<const double> durations) {
  const double t0 = setup.t0 ? *setup.t0 : common_t0(clients, servers);
  const auto c = progress_series(clients, setup.scenario.client, setup.bin_width, setup.window, t0);
  const auto s = progress_series(servers, setup.scenario.server, setup.bin_width, setup.window, t0);
  std::vector<CurvePoint> curve;
  for (double d : durations) {
    if (d > setup.window + 1e-9) {
      throw Error(ErrorCode::kInvalidArgument, "duration exceeds the trace window");
    }
    const auto bins = static_cast<std::size_t>(std::llround(std::floor(d / setup.bin_width + 1e-9)));
    if (bins < 3) throw Error(ErrorCode::kInvalidArgument, "duration shorter than three bins");
    std::vector<ByteProgressSeries> cp;
    std::vector<ByteProgressSeries> sp;
    for (const auto& x : c) cp.push_back(x.prefix(bins));
    for (const auto& x : s) sp.push_back(x.prefix(bins));
    auto run = correlate_series(cp, sp, ids_of(clients), ids_of(servers), setup, &truth);
    curve.push_back({d, *run.report});
  }
  return curve;
}

RecallReport detector_recall(std::span<const hijack::HijackAlert> alerts,
                             std::span<const sim::PlantedEvent> events) {
  RecallReport r;
  r.planted = events.size();
  r.alerts = alerts.size();
  auto hits = [](const hijack::HijackAlert& a, const sim::PlantedEvent& e) {
    return a.prefix.overlaps(e.prefix) && a.window.start < e.end && e.start < a.window.end;
  };
  for (const auto& e : events) {
    const bool found = std::any_of(alerts.begin(), alerts.end(), [&](const auto& a) { return hits(a, e); });
    if (found) {
      ++r.detected;
    } else {
      r.missed.push_back(e.label + " " + e.prefix.to_string());
    }
  }
  for (const auto& a : alerts) {
    if (std::none_of(events.begin(), events.end(), [&](const auto& e) { return hits(a, e); })) {
      ++r.false_alerts;
    }
  }
  r.recall = r.planted == 0 ? 0.0 : static_cast<double>(r.detected) / static_cast<double>(r.planted);
  return r;
}

Aggregate aggregate(std::span<const double> values) {
  Aggregate a;
  a.n = values.size();
  if (values.empty()) return a;
  a.min = *std::min_element(values.begin(), values.end());
  a.max = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  a.mean = sum / static_cast<double>(values.size());
  return a;
}

nlohmann::json to_json(const Aggregate& a) {
  return {{"n", a.n}, {"mean", a.mean}, {"min", a.min}, {"max", a.max}};
}

nlohmann::json to_json(const AccuracyReport& r) {
  return {{"clients", r.clients},
          {"correct", r.correct},
          {"false_negatives", r.false_negatives},
          {"false_positives", r.false_positives},
          {"accuracy", r.accuracy},
          {"false_negative_rate", r.false_negative_rate},
          {"false_positive_rate", r.false_positive_rate}};
}

AccuracyReport traffic_accuracy(const sim::TrafficScenario& scenario, const CorrelationSetup& setup) {
  const auto data = sim::gen_traffic(scenario);
  return *run_correlation(data.clients, data.servers, setup, &data.truth.pairing).report;
}

AccuracyReport interception_accuracy(const sim::InterceptionScenario& scenario,
                                     const CorrelationSetup& setup) {
  const auto data = sim::gen_interception_timeline(scenario);
  CorrelationSetup s = setup;
  s.t0 = data.capture.start;
  s.window = data.capture.end - data.capture.start;
  s.scenario = {traffic::SignalKind::kAck, traffic::SignalKind::kAck};
  return *run_correlation(data.attacker_captures, data.traffic.servers, s, &data.traffic.truth.pairing)
              .report;
}

nlohmann::json to_json(const ExperimentReport& report) {
  nlohmann::json j;
  j["experiment"] = report.name;
  j["scenario"] = report.scenario;
  j["seeds"] = report.seeds;
  j["metrics"] = report.metrics;
  j["artifacts"] = report.artifacts;
  j["meta"] = {{"runtime_seconds", report.runtime_seconds}};
  return j;
}

std::vector<std::string> experiment_names() {
  return {"accuracy", "duration", "interception", "detection", "intervals"};
}

namespace {

nlohmann::json setup_json(const CorrelationSetup& s) {
  return {{"scenario", s.scenario.to_string()},
          {"bin_width", s.bin_width},
          {"window", s.window},
          {"threshold", s.threshold},
          {"max_lag_bins", s.correlate.max_lag_bins},
          {"cumulative", s.correlate.cumulative}};
}

nlohmann::json interval_json(std::uint64_t k, std::uint64_t n) {
  const auto ci = traffic::clopper_pearson(k, n, 0.95);
  return {{"errors", k}, {"trials", n}, {"lower_percent", 100.0 * ci.lower}, {"upper_percent", 100.0 * ci.upper}};
}

nlohmann::json accuracy_experiment(std::span<const std::uint64_t> seeds, const CorrelationSetup& setup) {
  std::vector<double> plain;
  std::vector<double> shared;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t trials = 0;
  std::uint64_t shared_fp = 0;
  std::uint64_t shared_fn = 0;
  for (auto seed : seeds) {
    sim::TrafficScenario sc;
    sc.seed = seed;
    const auto a = traffic_accuracy(sc, setup);
    const auto b = traffic_accuracy(sim::shared_guard(sc, sim::kSharedGuardShare, sim::kSharedGuardJitter), setup);
    plain.push_back(a.accuracy);
    shared.push_back(b.accuracy);
    fp += a.false_positives;
    fn += a.false_negatives;
    shared_fp += b.false_positives;
    shared_fn += b.false_negatives;
    trials += a.clients;
  }
  return {{"unshared", {{"accuracy", to_json(aggregate(plain))},
                        {"false_positives", interval_json(fp, trials)},
                        {"false_negatives", interval_json(fn, trials)}}},
          {"shared_guard", {{"accuracy", to_json(aggregate(shared))},
                            {"false_positives", interval_json(shared_fp, trials)},
                            {"false_negatives", interval_json(shared_fn, trials)}}}};
}

nlohmann::json duration_experiment(std::span<const std::uint64_t> seeds, const CorrelationSetup& setup) {
  const auto durations = default_durations();
  std::vector<std::vector<double>> acc(durations.size());
  for (auto seed : seeds) {
    sim::TrafficScenario sc;
    sc.seed = seed;
    const auto data = sim::gen_traffic(sc);
    const auto curve = accuracy_vs_duration(data.clients, data.servers, data.truth.pairing, setup, durations);
    for (std::size_t i = 0; i < curve.size(); ++i) acc[i].push_back(curve[i].report.accuracy);
  }
  auto points = nlohmann::json::array();
  for (std::size_t i = 0; i < durations.size(); ++i) {
    points.push_back({{"duration", durations[i]}, {"accuracy", to_json(aggregate(acc[i]))}});
  }
  return {{"curve", points}};
}

nlohmann::json interception_experiment(std::span<const std::uint64_t> seeds, const CorrelationSetup& setup) {
  std::vector<double> acc;
  for (auto seed : seeds) acc.push_back(interception_accuracy(sim::default_interception(seed), setup).accuracy);
  const auto cap = sim::capture_interval(20, 35, 300, 22);
  return {{"capture", {cap.start, cap.end}}, {"accuracy", to_json(aggregate(acc))}};
}

nlohmann::json detection_experiment(std::span<const std::uint64_t> seeds) {
  std::vector<double> recall;
  std::size_t false_alerts = 0;
  for (auto seed : seeds) {
    const auto sc = sim::hijack_suite(seed);
    const auto data = sim::gen_updates(sc);
    const auto stream = data.stream();
    const RelayIndex relays(sc.relays);
    const hijack::DetectionWindow window{sc.t0, sc.horizon};
    auto alerts = hijack::frequency_heuristic(stream, relays, window);
    auto more = hijack::time_heuristic(stream, relays, window);
    alerts.insert(alerts.end(), more.begin(), more.end());
    more = hijack::more_specific_monitor(stream, relays, window);
    alerts.insert(alerts.end(), more.begin(), more.end());
    const auto r = detector_recall(alerts, data.truth.events);
    recall.push_back(r.recall);
    false_alerts += r.false_alerts;
  }
  auto xref = nlohmann::json::array();
  for (const auto& shape : {sim::indosat_2011(), sim::indosat_2014()}) {
    const auto sc = sim::indosat_scenario(shape, seeds.empty() ? 1 : seeds.front());
    const auto data = sim::gen_updates(sc);
    const auto rows = hijack::cross_reference(sim::known_events(data.truth), RelayIndex(sc.relays));
    for (const auto& row : rows) {
      xref.push_back({{"label", row.label},
                      {"prefixes", row.prefixes},
                      {"relay_prefixes", row.relay_prefixes},
                      {"relays", row.relays},
                      {"guards", row.guards},
                      {"exits", row.exits}});
    }
  }
  return {{"recall", to_json(aggregate(recall))}, {"false_alerts", false_alerts}, {"cross_reference", xref}};
}

}  // namespace

ExperimentReport run_experiment(const std::string& name, std::span<const std::uint64_t> seeds,
                                const CorrelationSetup& setup) {
  const auto started = std::chrono::steady_clock::now();
  ExperimentReport report;
  report.name = name;
  report.seeds.assign(seeds.begin(), seeds.end());
  if (name == "accuracy") {
    report.scenario = {{"traffic", sim::to_json(sim::TrafficScenario{})}, {"correlation", setup_json(setup)}};
    report.metrics = accuracy_experiment(seeds, setup);
  } else if (name == "duration") {
    report.scenario = {{"traffic", sim::to_json(sim::TrafficScenario{})}, {"correlation", setup_json(setup)}};
    report.metrics = duration_experiment(seeds, setup);
  } else if (name == "interception") {
    report.scenario = {{"traffic", sim::to_json(sim::default_interception(1).traffic)},
                       {"announce_at", 20}, {"propagation", 35}, {"withdraw_at", 300}, {"reconvergence", 22},
                       {"correlation", setup_json(setup)}};
    report.metrics = interception_experiment(seeds, setup);
  } else if (name == "detection") {
    report.scenario = {{"suite", "hijack_suite"}, {"frequency_threshold", 1e-5}, {"time_threshold", 0.01}};
    report.metrics = detection_experiment(seeds);
  } else if (name == "intervals") {
    report.scenario = {{"confidence", 0.95}};
    auto rows = nlohmann::json::array();
    for (auto [k, n] : {std::pair<std::uint64_t, std::uint64_t>{2, 50}, {3, 50}, {0, 2450}}) {
      rows.push_back(interval_json(k, n));
    }
    report.metrics = {{"intervals", rows}};
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown experiment " + name);
  }
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

namespace {

void flatten(const nlohmann::json& j, const std::string& path, std::ostringstream& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, path.empty() ? k : path + "." + k, out);
  } else if (j.is_array() && !j.empty() && j.front().is_structured()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], path + "[" + std::to_string(i) + "]", out);
  } else {
    char buf[64];
    std::string value;
    if (j.is_number_float()) {
      std::snprintf(buf, sizeof buf, "%.4f", j.get<double>());
      value = buf;
    } else {
      value = j.dump();
    }
    std::snprintf(buf, sizeof buf, "%-48s ", path.c_str());
    out << buf << value << '\n';
  }
}

}  // namespace

std::string format_table(const ExperimentReport& report) {
  std::ostringstream out;
  out << "experiment " << report.name << " (" << report.seeds.size() << " seeds)\n";
  flatten(report.metrics, "", out);
  return out.str();
}

}  // namespace raptor::eval
