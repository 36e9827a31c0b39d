#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

namespace raptor::artifact {

inline constexpr std::string_view kTool = "raptor";
inline constexpr std::string_view kVersion = "0.1.0";

/// Provenance stamped on every output file.
struct Meta {
  std::string command;
  /// Effective configuration, thresholds included.
  nlohmann::json config = nlohmann::json::object();
  std::optional<std::uint64_t> seed;
  /// Fixed clock for reproducible headers; the current UTC time otherwise.
  std::optional<std::string> generated_at;
};

/// FNV-1a (64 bit, hex) of the canonical config dump, ignoring output_dir.
std::string config_hash(const nlohmann::json& config);

nlohmann::json meta_json(const Meta& meta);

/// `# tool=... version=... command=... config_hash=... seed=... generated_at=...`
/// followed by `# config=<json>`.
void write_csv_header(std::ostream& out, const Meta& meta);
/// A single `{"meta":{...}}` line.
void write_jsonl_header(std::ostream& out, const Meta& meta);

enum class Format { kCsv, kJsonl, kJson };

/// Writes `body` to `path` behind the header for `format`. JSON documents
/// get the metadata under a top-level "meta" key instead; `body` must then
/// produce one JSON object. Throws kIo.
void write_file(const std::filesystem::path& path, Format format, const Meta& meta,
                const std::function<void(std::ostream&)>& body);

/// Blanks generated_at and runtime fields so re-runs compare equal.
std::string normalize(std::string_view text);

/// True when both files exist and match after normalization.
bool same_artifact(const std::filesystem::path& a, const std::filesystem::path& b);

}  // namespace raptor::artifact
