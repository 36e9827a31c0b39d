#include "raptor/artifact.hpp"

#include "raptor/error.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <regex>
#include <sstream>

namespace raptor::artifact {

namespace {

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string stamp(const Meta& meta) { return meta.generated_at ? *meta.generated_at : now_utc(); }

}  // namespace

std::string config_hash(const nlohmann::json& config) {
  nlohmann::json canonical = config;
  if (canonical.is_object()) canonical.erase("output_dir");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json meta_json(const Meta& meta) {
  nlohmann::json j;
  j["tool"] = kTool;
  j["version"] = kVersion;
  j["command"] = meta.command;
  j["config_hash"] = config_hash(meta.config);
  j["seed"] = meta.seed ? nlohmann::json(*meta.seed) : nlohmann::json();
  j["generated_at"] = stamp(meta);
  j["config"] = meta.config;
  return j;
}

void write_csv_header(std::ostream& out, const Meta& meta) {
  out << "# tool=" << kTool << " version=" << kVersion << " command=" << meta.command
      << " config_hash=" << config_hash(meta.config)
      << " seed=" << (meta.seed ? std::to_string(*meta.seed) : std::string("none"))
      << " generated_at=" << stamp(meta) << '\n';
  out << "# config=" << meta.config.dump() << '\n';
}

void write_jsonl_header(std::ostream& out, const Meta& meta) {
  out << nlohmann::json{{"meta", meta_json(meta)}}.dump() << '\n';
}

void write_file(const std::filesystem::path& path, Format format, const Meta& meta,
                const std::function<void(std::ostream&)>& body) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  if (format == Format::kJson) {
    std::ostringstream buf;
    body(buf);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kIo, std::string("artifact body is not JSON: ") + e.what());
    }
    auto stamped = meta_json(meta);
    if (doc.contains("meta") && doc["meta"].is_object()) {
      for (auto& [k, v] : doc["meta"].items()) stamped[k] = v;
    }
    doc["meta"] = stamped;
    out << doc.dump(2) << '\n';
  } else {
    if (format == Format::kCsv) {
      write_csv_header(out, meta);
    } else {
      write_jsonl_header(out, meta);
    }
    body(out);
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

std::string normalize(std::string_view text) {
  static const std::regex csv_stamp(R"(generated_at=\S+)");
  static const std::regex json_stamp(R"re("generated_at"\s*:\s*"[^"]*")re");
  static const std::regex runtime(R"re("runtime_seconds"\s*:\s*[-+0-9.eE]+)re");
  std::string s(text);
  s = std::regex_replace(s, csv_stamp, "generated_at=*");
  s = std::regex_replace(s, json_stamp, "\"generated_at\":\"*\"");
  s = std::regex_replace(s, runtime, "\"runtime_seconds\":0");
  return s;
}

bool same_artifact(const std::filesystem::path& a, const std::filesystem::path& b) {
  auto slurp = [](const std::filesystem::path& p) -> std::optional<std::string> {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  const auto x = slurp(a);
  const auto y = slurp(b);
  return x && y && normalize(*x) == normalize(*y);
}

}  // namespace raptor::artifact
