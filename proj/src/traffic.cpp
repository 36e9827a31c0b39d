#include "raptor/traffic.hpp"

#include "raptor/error.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace raptor::traffic {

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::kToRelay: return "to_relay";
    case Direction::kFromRelay: return "from_relay";
    case Direction::kToServer: return "to_server";
    case Direction::kFromServer: return "from_server";
  }
  return "?";
}

std::optional<Direction> parse_direction(std::string_view text) {
  for (auto d : {Direction::kToRelay, Direction::kFromRelay, Direction::kToServer,
                 Direction::kFromServer}) {
    if (text == to_string(d)) return d;
  }
  return std::nullopt;
}

Direction opposite(Direction d) {
  switch (d) {
    case Direction::kToRelay: return Direction::kFromRelay;
    case Direction::kFromRelay: return Direction::kToRelay;
    case Direction::kToServer: return Direction::kFromServer;
    case Direction::kFromServer: return Direction::kToServer;
  }
  return d;
}

std::string_view to_string(SignalKind k) { return k == SignalKind::kData ? "data" : "ack"; }

std::optional<Scenario> Scenario::parse(std::string_view text) {
  auto kind = [](std::string_view s) -> std::optional<SignalKind> {
    if (s == "data") return SignalKind::kData;
    if (s == "ack") return SignalKind::kAck;
    return std::nullopt;
  };
  constexpr std::string_view kClient = "client-";
  constexpr std::string_view kServer = "server-";
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  auto left = text.substr(0, colon);
  auto right = text.substr(colon + 1);
  if (!left.starts_with(kClient) || !right.starts_with(kServer)) return std::nullopt;
  auto c = kind(left.substr(kClient.size()));
  auto s = kind(right.substr(kServer.size()));
  if (!c || !s) return std::nullopt;
  return Scenario{*c, *s};
}

std::string Scenario::to_string() const {
  return "client-" + std::string(traffic::to_string(client)) + ":server-" +
         std::string(traffic::to_string(server));
}

std::vector<Scenario> all_scenarios() {
  return {{SignalKind::kAck, SignalKind::kAck},
          {SignalKind::kAck, SignalKind::kData},
          {SignalKind::kData, SignalKind::kAck},
          {SignalKind::kData, SignalKind::kData}};
}

double ByteProgressSeries::total() const {
  return std::accumulate(deltas.begin(), deltas.end(), 0.0);
}

std::vector<double> ByteProgressSeries::cumulative() const {
  std::vector<double> out(deltas.size());
  std::partial_sum(deltas.begin(), deltas.end(), out.begin());
  return out;
}

ByteProgressSeries ByteProgressSeries::prefix(std::size_t bins) const {
  ByteProgressSeries out{bin_width, t0, {}};
  out.deltas.assign(deltas.begin(),
                    deltas.begin() + static_cast<std::ptrdiff_t>(std::min(bins, deltas.size())));
  return out;
}

std::vector<std::uint64_t> unwrap_cumulative(std::span<const std::uint32_t> values) {
  if (values.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "unwrap_cumulative needs at least one value");
  }
  constexpr std::int64_t kModulus = std::int64_t{1} << 32;
  std::vector<std::int64_t> signed_out(values.size());
  signed_out[0] = values[0];
  std::int64_t lowest = signed_out[0];
  for (std::size_t i = 1; i < values.size(); ++i) {
    // Unsigned subtraction is the difference mod 2^32; map it into
    // (-2^31, 2^31].
    std::int64_t step = static_cast<std::uint32_t>(values[i] - values[i - 1]);
    if (step > kModulus / 2) step -= kModulus;
    signed_out[i] = signed_out[i - 1] + step;
    lowest = std::min(lowest, signed_out[i]);
  }
  std::int64_t shift = 0;
  if (lowest < 0) shift = ((-lowest + kModulus - 1) / kModulus) * kModulus;
  std::vector<std::uint64_t> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = static_cast<std::uint64_t>(signed_out[i] + shift);
  }
  return out;
}

namespace {

bool carries_ack(const PacketObservation& p) { return p.has(flag::kAck); }

}  // namespace

Direction infer_direction(const EndpointTrace& trace, SignalKind kind) {
  constexpr Direction kAll[] = {Direction::kToRelay, Direction::kFromRelay,
                                Direction::kToServer, Direction::kFromServer};
  std::optional<Direction> best;
  std::uint64_t best_score = 0;
  for (Direction d : kAll) {
    std::uint64_t score = 0;
    bool seen = false;
    if (kind == SignalKind::kData) {
      for (const auto& p : trace.observations) {
        if (p.direction == d) {
          seen = true;
          score += p.payload_len;
        }
      }
    } else {
      std::vector<std::uint32_t> acks;
      for (const auto& p : trace.observations) {
        if (p.direction == d && carries_ack(p)) acks.push_back(p.ack);
      }
      if (!acks.empty()) {
        seen = true;
        auto unwrapped = unwrap_cumulative(acks);
        score = *std::max_element(unwrapped.begin(), unwrapped.end()) - unwrapped.front();
      }
    }
    if (seen && (!best || score > best_score)) {
      best = d;
      best_score = score;
    }
  }
  if (!best) {
    throw Error(ErrorCode::kEmptyDirection, "trace " + trace.vantage_id + " has no packets");
  }
  return *best;
}

ByteProgressSeries extract_progress(const EndpointTrace& trace, const ProgressOptions& options) {
  if (!(options.bin_width > 0.0) || !(options.window > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "bin width and window must be positive");
  }
  const Direction dir = options.direction ? *options.direction
                                          : infer_direction(trace, options.kind);

  std::vector<const PacketObservation*> selected;
  for (const auto& p : trace.observations) {
    if (p.direction != dir) continue;
    if (options.kind == SignalKind::kAck && !carries_ack(p)) continue;
    selected.push_back(&p);
  }
  if (selected.empty()) {
    throw Error(ErrorCode::kEmptyDirection,
                "trace " + trace.vantage_id + " has no " +
                    std::string(to_string(options.kind)) + " packets in direction " +
                    std::string(to_string(dir)));
  }
  std::stable_sort(selected.begin(), selected.end(),
                   [](const PacketObservation* a, const PacketObservation* b) {
                     return a->timestamp < b->timestamp;
                   });

  std::vector<std::uint32_t> raw(selected.size());
  for (std::size_t i = 0; i < selected.size(); ++i) {
    raw[i] = options.kind == SignalKind::kData ? selected[i]->seq : selected[i]->ack;
  }
  const auto unwrapped = unwrap_cumulative(raw);

  // Counter value reached once packet i has been observed.
  std::vector<std::uint64_t> value(selected.size());
  for (std::size_t i = 0; i < selected.size(); ++i) {
    const auto& p = *selected[i];
    if (options.kind == SignalKind::kData) {
      value[i] = unwrapped[i] + (p.has(flag::kSyn) ? 1u : p.payload_len);
    } else {
      value[i] = unwrapped[i];
    }
  }
  const std::uint64_t initial = options.kind == SignalKind::kData
                                    ? unwrapped[0] + (selected[0]->has(flag::kSyn) ? 1u : 0u)
                                    : unwrapped[0];

  const auto bins = static_cast<std::size_t>(std::ceil(options.window / options.bin_width - 1e-9));
  ByteProgressSeries out{options.bin_width, options.t0, std::vector<double>(bins, 0.0)};

  std::size_t next = 0;
  std::uint64_t running = initial;
  // Progress accumulated before the window opens is not part of any bin.
  while (next < selected.size() && selected[next]->timestamp < options.t0) {
    running = std::max(running, value[next]);
    ++next;
  }
  std::uint64_t previous = running;
  for (std::size_t b = 0; b < bins; ++b) {
    const double bin_end = options.t0 + static_cast<double>(b + 1) * options.bin_width;
    while (next < selected.size() && selected[next]->timestamp < bin_end) {
      running = std::max(running, value[next]);
      ++next;
    }
    out.deltas[b] = static_cast<double>(running - previous);
    previous = running;
  }
  return out;
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    // Positions i..j-1 (0-based) share rank mean((i+1)..j).
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

namespace {

// Centered ranks with their sum of squares; the reusable half of a Spearman
// computation.
struct RankProfile {
  std::vector<double> centered;
  double sum_squares = 0.0;
};

RankProfile rank_profile(std::span<const double> values) {
  RankProfile profile;
  profile.centered = average_ranks(values);
  const double mean = static_cast<double>(values.size() + 1) / 2.0;
  for (double& r : profile.centered) {
    r -= mean;
    profile.sum_squares += r * r;
  }
  return profile;
}

std::optional<double> profile_correlation(const RankProfile& x, const RankProfile& y) {
  if (x.sum_squares == 0.0 || y.sum_squares == 0.0) return std::nullopt;
  double cross = 0.0;
  for (std::size_t i = 0; i < x.centered.size(); ++i) cross += x.centered[i] * y.centered[i];
  const double r = cross / std::sqrt(x.sum_squares * y.sum_squares);
  return std::clamp(r, -1.0, 1.0);
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kLengthMismatch, "spearman inputs differ in length");
  }
  if (x.size() < 3) {
    throw Error(ErrorCode::kLengthMismatch, "spearman needs at least three observations");
  }
  auto r = profile_correlation(rank_profile(x), rank_profile(y));
  if (!r) throw Error(ErrorCode::kConstantInput, "spearman input is constant");
  return *r;
}

CorrelationMatrix correlate_all(std::span<const ByteProgressSeries> clients,
                                std::span<const ByteProgressSeries> servers,
                                const CorrelateOptions& options,
                                std::vector<std::string> client_ids,
                                std::vector<std::string> server_ids) {
  auto default_ids = [](std::size_t n) {
    std::vector<std::string> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = std::to_string(i);
    return ids;
  };
  if (client_ids.empty()) client_ids = default_ids(clients.size());
  if (server_ids.empty()) server_ids = default_ids(servers.size());
  if (client_ids.size() != clients.size() || server_ids.size() != servers.size()) {
    throw Error(ErrorCode::kInvalidArgument, "id list does not match series count");
  }
  if (options.max_lag_bins < 0) {
    throw Error(ErrorCode::kInvalidArgument, "max lag must be non-negative");
  }

  std::optional<std::size_t> length;
  std::optional<double> width;
  auto signal = [&](const ByteProgressSeries& s) {
    if (!length) {
      length = s.deltas.size();
      width = s.bin_width;
    } else if (s.deltas.size() != *length || s.bin_width != *width) {
      throw Error(ErrorCode::kInvalidArgument,
                  "series must share bin width and window before correlation");
    }
    return options.cumulative ? s.cumulative() : s.deltas;
  };
  std::vector<std::vector<double>> client_signal;
  std::vector<std::vector<double>> server_signal;
  for (const auto& s : clients) client_signal.push_back(signal(s));
  for (const auto& s : servers) server_signal.push_back(signal(s));

  CorrelationMatrix m;
  m.row_ids = std::move(client_ids);
  m.col_ids = std::move(server_ids);
  m.cells.assign(clients.size() * servers.size(), std::nullopt);
  m.lags.assign(clients.size() * servers.size(), 0);
  const std::size_t n = length.value_or(0);

  if (options.max_lag_bins == 0) {
    std::vector<RankProfile> cp;
    std::vector<RankProfile> sp;
    for (const auto& v : client_signal) cp.push_back(rank_profile(v));
    for (const auto& v : server_signal) sp.push_back(rank_profile(v));
    if (n < 3) return m;
    for (std::size_t i = 0; i < cp.size(); ++i) {
      for (std::size_t j = 0; j < sp.size(); ++j) {
        m.cells[i * sp.size() + j] = profile_correlation(cp[i], sp[j]);
      }
    }
    return m;
  }

  // Positive lag compares client bin t with server bin t + lag.
  for (std::size_t i = 0; i < client_signal.size(); ++i) {
    for (std::size_t j = 0; j < server_signal.size(); ++j) {
      std::optional<double> best;
      int best_lag = 0;
      for (int lag = -options.max_lag_bins; lag <= options.max_lag_bins; ++lag) {
        const std::size_t shift = static_cast<std::size_t>(std::abs(lag));
        if (n < shift + 3) continue;
        const std::size_t overlap = n - shift;
        std::span<const double> x(client_signal[i]);
        std::span<const double> y(server_signal[j]);
        x = lag >= 0 ? x.subspan(0, overlap) : x.subspan(shift, overlap);
        y = lag >= 0 ? y.subspan(shift, overlap) : y.subspan(0, overlap);
        auto r = profile_correlation(rank_profile(x), rank_profile(y));
        if (r && (!best || *r > *best)) {
          best = r;
          best_lag = lag;
        }
      }
      m.cells[i * server_signal.size() + j] = best;
      m.lags[i * server_signal.size() + j] = best_lag;
    }
  }
  return m;
}

std::vector<MatchResult> match(const CorrelationMatrix& matrix, double threshold,
                               Scenario scenario) {
  std::vector<MatchResult> results;
  results.reserve(matrix.rows());
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    MatchResult result;
    result.client_id = matrix.row_ids[r];
    result.scenario = scenario;
    std::optional<std::size_t> best;
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
      auto v = matrix.at(r, c);
      if (!v) continue;
      if (!best || *v > *matrix.at(r, *best)) {
        best = c;
        result.tie = false;
      } else if (*v == *matrix.at(r, *best)) {
        result.tie = true;
      }
    }
    if (best) {
      result.coefficient = matrix.at(r, *best);
      if (*result.coefficient >= threshold) result.matched_server_id = matrix.col_ids[*best];
    }
    results.push_back(std::move(result));
  }
  return results;
}

AccuracyReport evaluate(std::span<const MatchResult> matches,
                        const std::map<std::string, std::string>& truth) {
  AccuracyReport report;
  report.clients = matches.size();
  for (const auto& m : matches) {
    auto partner = truth.find(m.client_id);
    if (!m.matched_server_id) {
      if (partner != truth.end()) {
        ++report.false_negatives;
      } else {
        ++report.correct;
      }
    } else if (partner != truth.end() && partner->second == *m.matched_server_id) {
      ++report.correct;
    } else {
      ++report.false_positives;
    }
  }
  if (report.clients > 0) {
    const auto n = static_cast<double>(report.clients);
    report.accuracy = static_cast<double>(report.correct) / n;
    report.false_negative_rate = static_cast<double>(report.false_negatives) / n;
    report.false_positive_rate = static_cast<double>(report.false_positives) / n;
  }
  return report;
}

RateInterval clopper_pearson(std::uint64_t successes, std::uint64_t trials, double confidence) {
  if (trials == 0 || successes > trials || !(confidence > 0.0) || !(confidence < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "clopper_pearson needs 0 <= k <= n, n > 0");
  }
  const double alpha = 1.0 - confidence;
  const auto k = static_cast<double>(successes);
  const auto n = static_cast<double>(trials);
  RateInterval interval;
  interval.lower = successes == 0 ? 0.0 : boost::math::ibeta_inv(k, n - k + 1.0, alpha / 2.0);
  interval.upper =
      successes == trials ? 1.0 : boost::math::ibeta_inv(k + 1.0, n - k, 1.0 - alpha / 2.0);
  return interval;
}

}  // namespace raptor::traffic
