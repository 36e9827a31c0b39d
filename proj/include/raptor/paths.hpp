#pragma once

#include "raptor/model.hpp"
#include "raptor/prefix_table.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace raptor::paths {

/// P1 client->guard, P2 guard->client, P3 exit->dest, P4 dest->exit.
enum class PathRole { kP1, kP2, kP3, kP4 };

std::string_view to_string(PathRole role);
std::optional<PathRole> parse_role(std::string_view text);

struct AsLevelPath {
  std::string probe;
  std::string target;
  PathRole role = PathRole::kP1;
  std::string day;
  std::vector<Asn> ases;
  /// Some hop could not be mapped to an AS.
  bool gap = false;
  /// Copied from an earlier day because this day had no measurement.
  bool inherited = false;
};

/// Maps hop addresses to ASes. "*" and unmapped hops are dropped and set the
/// gap flag; private-range hops are dropped silently. Repeated ASes collapse
/// to their first occurrence. Throws kEmptyPath for an empty hop list.
AsLevelPath resolve_traceroute(std::span<const std::string> hops, const PrefixTable<Asn>& mapping);

/// One traceroute measurement as read from JSON Lines
/// `{probe, target, role, day, hops}`.
struct TracerouteRecord {
  std::string probe;
  std::string target;
  PathRole role = PathRole::kP1;
  std::string day;
  std::vector<std::string> hops;
};

std::vector<TracerouteRecord> read_traceroutes(std::istream& in);
std::vector<TracerouteRecord> read_traceroutes(const std::filesystem::path& path);
void write_traceroutes(std::ostream& out, std::span<const TracerouteRecord> records);

AsLevelPath resolve(const TracerouteRecord& record, const PrefixTable<Asn>& mapping);

struct CircuitQuad {
  std::string client;
  std::string guard;
  std::string exit;
  std::string dest;
};

enum class Mode { kSymmetric, kAsymmetric };

/// The four paths of one quad on one day. Symmetric mode reads only P1 and
/// P3.
struct QuadPaths {
  const AsLevelPath* p1 = nullptr;
  const AsLevelPath* p2 = nullptr;
  const AsLevelPath* p3 = nullptr;
  const AsLevelPath* p4 = nullptr;
};

struct Verdict {
  bool vulnerable = false;
  std::set<Asn> witness;
};

/// Common ASes between the client and destination segments, minus
/// `exclusions`. Throws kMissingPath when a needed path is absent.
Verdict vulnerable(const QuadPaths& paths, Mode mode, const std::set<Asn>& exclusions = {});

/// Every path of a measurement campaign, indexed by (role, probe, target,
/// day). Days sort lexicographically (ISO dates).
class PathDataset {
 public:
  PathDataset() = default;
  explicit PathDataset(std::vector<AsLevelPath> paths);

  [[nodiscard]] const std::vector<std::string>& days() const { return days_; }
  [[nodiscard]] const std::vector<std::string>& clients() const { return sets_[0]; }
  [[nodiscard]] const std::vector<std::string>& guards() const { return sets_[1]; }
  [[nodiscard]] const std::vector<std::string>& exits() const { return sets_[2]; }
  [[nodiscard]] const std::vector<std::string>& dests() const { return sets_[3]; }

  /// Path measured on `day`, or the latest earlier measurement marked as
  /// inherited; nullptr when neither exists.
  [[nodiscard]] const AsLevelPath* find(PathRole role, const std::string& probe,
                                        const std::string& target, const std::string& day) const;

  [[nodiscard]] QuadPaths quad(const CircuitQuad& q, const std::string& day) const;

 private:
  struct Key {
    PathRole role;
    std::string probe;
    std::string target;
    auto operator<=>(const Key&) const = default;
  };
  std::map<Key, std::map<std::string, AsLevelPath>> by_key_;
  mutable std::map<std::pair<Key, std::string>, AsLevelPath> inherited_;
  std::vector<std::string> days_;
  std::vector<std::string> sets_[4];
};

struct TimeseriesOptions {
  /// Ignore ASes hosting the quad's own endpoints.
  bool exclude_endpoints = false;
  /// Endpoint id -> hosting AS; used by `exclude_endpoints`.
  std::map<std::string, Asn> endpoint_as;
  std::set<Asn> exclusions;
};

struct DayVulnerability {
  std::string day;
  std::size_t quads = 0;
  /// Symmetric share on the first day, repeated on every row.
  double symmetric_day1_fixed = 0.0;
  double symmetric = 0.0;
  double asymmetric = 0.0;
  /// Quads vulnerable on this day or any earlier one.
  double asymmetric_cumulative = 0.0;
  /// Quads lacking a needed path even after inheritance.
  std::size_t missing_quads = 0;
  /// Paths carried over from an earlier day.
  std::size_t inherited_paths = 0;
};

/// Percent of S1 x S2 x S3 x S4 quads vulnerable per day. Quads with a
/// missing path count as not vulnerable and are reported in `missing_quads`.
std::vector<DayVulnerability> vulnerability_timeseries(const PathDataset& dataset,
                                                       const TimeseriesOptions& options = {});

void write_timeseries(std::ostream& out, std::span<const DayVulnerability> rows);

}  // namespace raptor::paths
