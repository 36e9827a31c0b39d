#pragma once

#include "raptor/hijack.hpp"
#include "raptor/simulation.hpp"
#include "raptor/traffic.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace raptor::eval {

struct CorrelationSetup {
  traffic::Scenario scenario;
  double bin_width = 1.0;
  double window = 300.0;
  double threshold = 0.6;
  traffic::CorrelateOptions correlate;
  /// Common epoch; defaults to the earliest observation of either side.
  std::optional<double> t0;
};

struct CorrelationRun {
  traffic::CorrelationMatrix matrix;
  std::vector<traffic::MatchResult> matches;
  std::optional<traffic::AccuracyReport> report;
};

/// Earliest observation over both trace sets.
double common_t0(std::span<const traffic::EndpointTrace> clients,
                 std::span<const traffic::EndpointTrace> servers);

std::vector<traffic::ByteProgressSeries> progress_series(
    std::span<const traffic::EndpointTrace> traces, traffic::SignalKind kind, double bin_width,
    double window, double t0);

/// extract -> correlate -> match, scored when a pairing is given.
CorrelationRun run_correlation(std::span<const traffic::EndpointTrace> clients,
                               std::span<const traffic::EndpointTrace> servers,
                               const CorrelationSetup& setup,
                               const std::map<std::string, std::string>* truth = nullptr);

struct CurvePoint {
  double duration = 0.0;
  traffic::AccuracyReport report;
};

std::vector<double> default_durations();

/// Accuracy using only the first T seconds of every series. Throws
/// kInvalidArgument when a duration exceeds the window or is shorter than
/// three bins.
std::vector<CurvePoint> accuracy_vs_duration(std::span<const traffic::EndpointTrace> clients,
                                             std::span<const traffic::EndpointTrace> servers,
                                             const std::map<std::string, std::string>& truth,
                                             const CorrelationSetup& setup,
                                             std::span<const double> durations);

struct RecallReport {
  std::size_t planted = 0;
  std::size_t detected = 0;
  double recall = 0.0;
  std::size_t alerts = 0;
  /// Alerts that overlap no planted event.
  std::size_t false_alerts = 0;
  std::vector<std::string> missed;
};

/// A planted event is detected when an alert's prefix overlaps its prefix
/// and the alert window intersects the event's.
RecallReport detector_recall(std::span<const hijack::HijackAlert> alerts,
                             std::span<const sim::PlantedEvent> events);

struct Aggregate {
  std::size_t n = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

Aggregate aggregate(std::span<const double> values);
nlohmann::json to_json(const Aggregate& a);
nlohmann::json to_json(const traffic::AccuracyReport& r);

/// Traffic pairs generated from `scenario` and correlated with `setup`.
traffic::AccuracyReport traffic_accuracy(const sim::TrafficScenario& scenario,
                                         const CorrelationSetup& setup);

/// Correlation of the attacker's captured client ACKs against server ACKs
/// over the capture interval.
traffic::AccuracyReport interception_accuracy(const sim::InterceptionScenario& scenario,
                                              const CorrelationSetup& setup);

struct ExperimentReport {
  std::string name;
  nlohmann::json scenario;
  std::vector<std::uint64_t> seeds;
  nlohmann::json metrics;
  double runtime_seconds = 0.0;
  std::vector<std::string> artifacts;
};

/// Runtime sits under "meta" so reports compare equal across runs.
nlohmann::json to_json(const ExperimentReport& report);

std::vector<std::string> experiment_names();

/// Named reproduction runs over `seeds`: accuracy (shared vs unshared
/// bottleneck), duration (accuracy curve), interception, detection,
/// intervals and churn. Throws kInvalidArgument for unknown names.
ExperimentReport run_experiment(const std::string& name, std::span<const std::uint64_t> seeds,
                                const CorrelationSetup& setup);

/// Plain-text rendering of a report's metrics.
std::string format_table(const ExperimentReport& report);

}  // namespace raptor::eval
