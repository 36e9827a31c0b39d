#include "oracles.hpp"

#include "raptor/error.hpp"
#include "raptor/evaluation.hpp"

#include <doctest.h>

using namespace raptor;
using namespace raptor::eval;
using fixture::pfx;

TEST_CASE("the full-window curve point equals the single-shot run") {
  sim::TrafficScenario s;
  s.n_pairs = 12;
  s.duration = 120;
  auto d = sim::gen_traffic(s);
  CorrelationSetup setup;
  setup.window = 120;
  auto single = run_correlation(d.clients, d.servers, setup, &d.truth.pairing);
  REQUIRE(single.report);
  const std::vector<double> durations{10, 60, 120};
  auto curve = accuracy_vs_duration(d.clients, d.servers, d.truth.pairing, setup, durations);
  REQUIRE(curve.size() == 3);
  CHECK(curve[2].duration == 120.0);
  CHECK(curve[2].report.correct == single.report->correct);
  CHECK(curve[2].report.accuracy == single.report->accuracy);
  CHECK(curve[2].report.false_positives == single.report->false_positives);

  const std::vector<double> too_long{121};
  CHECK_THROWS_AS(accuracy_vs_duration(d.clients, d.servers, d.truth.pairing, setup, too_long), Error);
  const std::vector<double> too_short{2};
  CHECK_THROWS_AS(accuracy_vs_duration(d.clients, d.servers, d.truth.pairing, setup, too_short), Error);
  CHECK(default_durations() == std::vector<double>{10, 30, 60, 120, 300});
}

TEST_CASE("series share one epoch") {
  sim::TrafficScenario s;
  s.n_pairs = 3;
  s.duration = 20;
  auto d = sim::gen_traffic(s);
  const double t0 = common_t0(d.clients, d.servers);
  for (const auto& t : d.clients) CHECK(t.observations.front().timestamp >= t0);
  for (const auto& t : d.servers) CHECK(t.observations.front().timestamp >= t0);
  auto series = progress_series(d.clients, traffic::SignalKind::kAck, 1.0, 20, t0);
  REQUIRE(series.size() == 3);
  for (const auto& x : series) CHECK(x.deltas.size() == 20);
}

TEST_CASE("detector recall") {
  std::vector<sim::PlantedEvent> events{{"a", sim::EventKind::kHijack, pfx("45.0.0.0/16"), 666, 100, 200},
                                        {"b", sim::EventKind::kInterception, pfx("45.1.1.0/24"), 667, 300, 400}};
  auto none = detector_recall({}, events);
  CHECK(none.planted == 2);
  CHECK(none.recall == 0.0);
  CHECK(none.missed.size() == 2);

  hijack::HijackAlert hit_a;
  hit_a.prefix = pfx("45.0.0.0/16");
  hit_a.window = {150, 160};
  hijack::HijackAlert hit_b;
  hit_b.prefix = pfx("45.1.0.0/16");
  hit_b.window = {390, 500};
  hijack::HijackAlert stray;
  stray.prefix = pfx("45.0.0.0/16");
  stray.window = {200, 250};
  std::vector<hijack::HijackAlert> alerts{hit_a, hit_b, stray};
  auto all = detector_recall(alerts, events);
  CHECK(all.detected == 2);
  CHECK(all.recall == 1.0);
  CHECK(all.alerts == 3);
  CHECK(all.false_alerts == 1);
  CHECK(all.missed.empty());

  CHECK(detector_recall({}, std::vector<sim::PlantedEvent>{}).planted == 0);
}

TEST_CASE("aggregates") {
  const std::vector<double> v{0.9, 1.0, 0.8};
  auto a = aggregate(v);
  CHECK(a.n == 3);
  CHECK(a.mean == doctest::Approx(0.9));
  CHECK(a.min == 0.8);
  CHECK(a.max == 1.0);
  CHECK(to_json(a)["n"] == 3);
}

TEST_CASE("experiments are reproducible") {
  const std::vector<std::uint64_t> seeds{1, 2};
  CorrelationSetup setup;
  auto a = run_experiment("detection", seeds, setup);
  auto b = run_experiment("detection", seeds, setup);
  CHECK(to_json(a)["metrics"] == to_json(b)["metrics"]);
  CHECK(a.seeds == seeds);
  CHECK_FALSE(format_table(a).empty());
  CHECK_THROWS_AS(run_experiment("nonsense", seeds, setup), Error);
  CHECK(experiment_names().size() >= 5);
}
