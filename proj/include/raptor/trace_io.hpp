#pragma once

#include "raptor/traffic.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace raptor::traffic {

/// One observation per JSON line: `{"ts","dir","seq","ack","len","flags"}`.
/// An optional leading `{"meta":{...}}` line carries the vantage id and flow.
EndpointTrace read_trace(std::istream& in, const std::string& vantage_id = {});
EndpointTrace read_trace(const std::filesystem::path& path, const std::string& vantage_id = {});
void write_trace(std::ostream& out, const EndpointTrace& trace);

std::string format_flow(const FlowKey& flow);
std::optional<FlowKey> parse_flow(std::string_view text);

enum class TraceRole { kClient, kServer };

/// Manifest CSV `file,vantage_id,role`; relative paths resolve against the
/// manifest's directory.
struct ManifestEntry {
  std::filesystem::path file;
  std::string vantage_id;
  TraceRole role = TraceRole::kClient;
};

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(std::ostream& out, const std::vector<ManifestEntry>& entries);

/// Ground-truth pairing `client_id -> server_id`, stored in a JSON document
/// under the key "pairing".
std::map<std::string, std::string> read_pairing(const std::filesystem::path& path);
void write_pairing(std::ostream& out, const std::map<std::string, std::string>& pairing);

/// Header `client_id,<server ids>`; missing cells stay empty.
void write_matrix(std::ostream& out, const CorrelationMatrix& matrix);
void write_matches(std::ostream& out, std::span<const MatchResult> matches);
void write_accuracy(std::ostream& out, const AccuracyReport& report);

}  // namespace raptor::traffic
