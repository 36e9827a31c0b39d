#pragma once

#include "raptor/ip.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace raptor::traffic {

/// Packet direction relative to the vantage. Client-side vantages see
/// kToRelay/kFromRelay, server-side vantages kToServer/kFromServer.
enum class Direction : std::uint8_t { kToRelay, kFromRelay, kToServer, kFromServer };

std::string_view to_string(Direction d);
std::optional<Direction> parse_direction(std::string_view text);
/// The reverse direction of the same TCP connection.
Direction opposite(Direction d);

namespace flag {
inline constexpr std::uint8_t kSyn = 1;
inline constexpr std::uint8_t kFin = 2;
inline constexpr std::uint8_t kRst = 4;
inline constexpr std::uint8_t kAck = 8;
}  // namespace flag

struct PacketObservation {
  double timestamp = 0.0;
  Direction direction = Direction::kToRelay;
  std::uint32_t seq = 0;
  std::uint32_t ack = 0;
  std::uint32_t payload_len = 0;
  std::uint8_t flags = flag::kAck;

  [[nodiscard]] bool has(std::uint8_t f) const { return (flags & f) != 0; }
  bool operator==(const PacketObservation&) const = default;
};

struct FlowKey {
  Ipv4Address src_addr;
  std::uint16_t src_port = 0;
  Ipv4Address dst_addr;
  std::uint16_t dst_port = 0;

  bool operator==(const FlowKey&) const = default;
};

/// Time-ordered TCP header observations of one flow at one vantage.
struct EndpointTrace {
  std::string vantage_id;
  FlowKey flow;
  std::vector<PacketObservation> observations;
};

/// DATA progress comes from sequence numbers plus payload, ACK progress
/// from cumulative acknowledgment numbers.
enum class SignalKind : std::uint8_t { kData, kAck };

std::string_view to_string(SignalKind k);

/// Which signal is read at each end, e.g. client ACK / server DATA.
struct Scenario {
  SignalKind client = SignalKind::kAck;
  SignalKind server = SignalKind::kAck;

  /// Parses `client-ack:server-data` style selectors.
  static std::optional<Scenario> parse(std::string_view text);
  [[nodiscard]] std::string to_string() const;
  bool operator==(const Scenario&) const = default;
};

/// The four observation cases (a)-(d): every combination of signal kinds.
std::vector<Scenario> all_scenarios();

/// Per-bin byte progress; `deltas[i]` covers [t0 + i*w, t0 + (i+1)*w).
struct ByteProgressSeries {
  double bin_width = 1.0;
  double t0 = 0.0;
  std::vector<double> deltas;

  [[nodiscard]] double total() const;
  /// Running sum of the deltas.
  [[nodiscard]] std::vector<double> cumulative() const;
  /// First `bins` bins of this series.
  [[nodiscard]] ByteProgressSeries prefix(std::size_t bins) const;
};

/// Undoes 32-bit wraparound: consecutive differences are taken mod 2^32 in
/// (-2^31, 2^31], anchored at the first value and shifted by the smallest
/// multiple of 2^32 that keeps every element non-negative.
std::vector<std::uint64_t> unwrap_cumulative(std::span<const std::uint32_t> values);

/// Picks the direction carrying the selected signal: for DATA the one with
/// the most payload, for ACK the one whose acknowledgments advance furthest.
Direction infer_direction(const EndpointTrace& trace, SignalKind kind);

struct ProgressOptions {
  SignalKind kind = SignalKind::kData;
  /// nullopt selects the direction automatically.
  std::optional<Direction> direction;
  double bin_width = 1.0;
  double window = 300.0;
  /// Common epoch for every series of a dataset.
  double t0 = 0.0;
};

/// Bins the cumulative byte progress of one trace.
///
/// Progress at time t is the running maximum of the unwrapped counter over
/// observations strictly before t, minus the counter's initial value; SYN and
/// FIN never count as payload. Bins before the first observation are zero.
/// Throws kEmptyDirection when no packet matches the direction selector.
ByteProgressSeries extract_progress(const EndpointTrace& trace, const ProgressOptions& options);

/// Average ranks, 1-based; ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman's rank correlation: Pearson correlation of the average ranks.
/// Throws kLengthMismatch for unequal lengths or fewer than three values,
/// and kConstantInput when either input has no variation.
double spearman(std::span<const double> x, std::span<const double> y);

struct CorrelateOptions {
  /// Search server shifts in [-max_lag_bins, max_lag_bins] and keep the best.
  int max_lag_bins = 0;
  /// Correlate cumulative counts instead of per-bin deltas.
  bool cumulative = false;
};

/// Rows are clients, columns servers. A missing cell means the pair was not
/// comparable (constant series).
struct CorrelationMatrix {
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;
  std::vector<std::optional<double>> cells;
  std::vector<int> lags;

  [[nodiscard]] std::size_t rows() const { return row_ids.size(); }
  [[nodiscard]] std::size_t cols() const { return col_ids.size(); }
  [[nodiscard]] std::optional<double> at(std::size_t r, std::size_t c) const {
    return cells[r * cols() + c];
  }
};

/// Pairwise Spearman sweep. Rows and columns are labelled "0", "1", ...
/// unless ids are given. All series must share bin width and length.
CorrelationMatrix correlate_all(std::span<const ByteProgressSeries> clients,
                                std::span<const ByteProgressSeries> servers,
                                const CorrelateOptions& options = {},
                                std::vector<std::string> client_ids = {},
                                std::vector<std::string> server_ids = {});

struct MatchResult {
  std::string client_id;
  std::optional<std::string> matched_server_id;
  /// Best coefficient in the row, reported even when below threshold.
  std::optional<double> coefficient;
  Scenario scenario;
  /// More than one server reached the row maximum; lowest index won.
  bool tie = false;
};

/// Row-wise argmax; rows whose best coefficient is below `threshold` stay
/// unmatched.
std::vector<MatchResult> match(const CorrelationMatrix& matrix, double threshold,
                               Scenario scenario = {});

struct AccuracyReport {
  std::size_t clients = 0;
  std::size_t correct = 0;
  std::size_t false_negatives = 0;
  std::size_t false_positives = 0;
  double accuracy = 0.0;
  double false_negative_rate = 0.0;
  double false_positive_rate = 0.0;
};

/// Scores matches against the true client->server pairing. Clients without
/// a partner count as correct when left unmatched.
AccuracyReport evaluate(std::span<const MatchResult> matches,
                        const std::map<std::string, std::string>& truth);

struct RateInterval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Exact two-sided binomial (Clopper-Pearson) interval for
/// successes/trials at the given confidence level.
RateInterval clopper_pearson(std::uint64_t successes, std::uint64_t trials, double confidence);

}  // namespace raptor::traffic
