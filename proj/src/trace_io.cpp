#include "raptor/trace_io.hpp"

#include "raptor/csv.hpp"
#include "raptor/dataset_io.hpp"
#include "raptor/error.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace raptor::traffic {

using nlohmann::json;

namespace {

constexpr std::pair<std::uint8_t, std::string_view> kFlagNames[] = {
    {flag::kSyn, "SYN"}, {flag::kFin, "FIN"}, {flag::kRst, "RST"}, {flag::kAck, "ACK"}};

std::uint8_t parse_flags(const json& value) {
  std::uint8_t flags = 0;
  for (const auto& item : value) {
    const auto name = item.get<std::string>();
    bool known = false;
    for (auto [bit, text] : kFlagNames) {
      if (name == text || (text == "ACK" && name == "ACK_FLAG")) {
        flags |= bit;
        known = true;
      }
    }
    if (!known) throw Error(ErrorCode::kParse, "unknown TCP flag " + name);
  }
  return flags;
}

}  // namespace

std::string format_flow(const FlowKey& flow) {
  return flow.src_addr.to_string() + ":" + std::to_string(flow.src_port) + ">" +
         flow.dst_addr.to_string() + ":" + std::to_string(flow.dst_port);
}

std::optional<FlowKey> parse_flow(std::string_view text) {
  auto endpoint = [](std::string_view s, Ipv4Address& addr, std::uint16_t& port) {
    const auto colon = s.rfind(':');
    if (colon == std::string_view::npos) return false;
    auto a = Ipv4Address::parse(s.substr(0, colon));
    if (!a) return false;
    addr = *a;
    auto digits = s.substr(colon + 1);
    auto [next, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
    return ec == std::errc{} && next == digits.data() + digits.size();
  };
  const auto arrow = text.find('>');
  if (arrow == std::string_view::npos) return std::nullopt;
  FlowKey flow;
  if (!endpoint(text.substr(0, arrow), flow.src_addr, flow.src_port) ||
      !endpoint(text.substr(arrow + 1), flow.dst_addr, flow.dst_port)) {
    return std::nullopt;
  }
  return flow;
}

EndpointTrace read_trace(std::istream& in, const std::string& vantage_id) {
  EndpointTrace trace;
  trace.vantage_id = vantage_id;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    try {
      const auto obj = json::parse(line);
      if (obj.contains("meta")) {
        const auto& meta = obj["meta"];
        if (trace.vantage_id.empty() && meta.contains("vantage_id")) {
          trace.vantage_id = meta["vantage_id"].get<std::string>();
        }
        if (meta.contains("flow")) {
          if (auto flow = parse_flow(meta["flow"].get<std::string>())) trace.flow = *flow;
        }
        continue;
      }
      PacketObservation p;
      p.timestamp = obj.at("ts").get<double>();
      auto dir = parse_direction(obj.at("dir").get<std::string>());
      if (!dir) throw Error(ErrorCode::kParse, "unknown direction");
      p.direction = *dir;
      p.seq = obj.value("seq", std::uint32_t{0});
      p.ack = obj.value("ack", std::uint32_t{0});
      p.payload_len = obj.value("len", std::uint32_t{0});
      p.flags = obj.contains("flags") ? parse_flags(obj["flags"]) : flag::kAck;
      if (!trace.observations.empty() && p.timestamp < trace.observations.back().timestamp) {
        throw Error(ErrorCode::kParse, "timestamps must be non-decreasing");
      }
      trace.observations.push_back(p);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParse, "trace line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kParse) throw;
      throw Error(ErrorCode::kParse, "trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return trace;
}

EndpointTrace read_trace(const std::filesystem::path& path, const std::string& vantage_id) {
  auto in = open_input(path);
  return read_trace(in, vantage_id);
}

void write_trace(std::ostream& out, const EndpointTrace& trace) {
  json meta = {{"vantage_id", trace.vantage_id}, {"flow", format_flow(trace.flow)}};
  out << json{{"meta", meta}}.dump() << '\n';
  char buffer[192];
  for (const auto& p : trace.observations) {
    std::string flags;
    for (auto [bit, text] : kFlagNames) {
      if (p.has(bit)) {
        if (!flags.empty()) flags += ',';
        flags += '"';
        flags += text;
        flags += '"';
      }
    }
    std::snprintf(buffer, sizeof buffer,
                  "{\"ts\":%.6f,\"dir\":\"%s\",\"seq\":%u,\"ack\":%u,\"len\":%u,\"flags\":[%s]}\n",
                  p.timestamp, std::string(to_string(p.direction)).c_str(), p.seq, p.ack,
                  p.payload_len, flags.c_str());
    out << buffer;
  }
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  auto in = open_input(path);
  csv::Reader reader(in);
  std::vector<std::string> f;
  std::vector<ManifestEntry> entries;
  bool first = true;
  while (reader.next(f)) {
    if (first && !f.empty() && f[0] == "file") {
      first = false;
      continue;
    }
    first = false;
    if (f.size() < 3) {
      throw Error(ErrorCode::kParse,
                  "manifest line " + std::to_string(reader.line_number()) +
                      ": expected file,vantage_id,role");
    }
    ManifestEntry e;
    e.file = f[0];
    if (e.file.is_relative()) e.file = path.parent_path() / e.file;
    e.vantage_id = f[1];
    if (f[2] == "client") {
      e.role = TraceRole::kClient;
    } else if (f[2] == "server") {
      e.role = TraceRole::kServer;
    } else {
      throw Error(ErrorCode::kParse, "manifest line " + std::to_string(reader.line_number()) +
                                         ": role must be client or server");
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_manifest(std::ostream& out, const std::vector<ManifestEntry>& entries) {
  out << "file,vantage_id,role\n";
  for (const auto& e : entries) {
    out << csv::escape(e.file.generic_string()) << ',' << csv::escape(e.vantage_id) << ','
        << (e.role == TraceRole::kClient ? "client" : "server") << '\n';
  }
}

std::map<std::string, std::string> read_pairing(const std::filesystem::path& path) {
  auto in = open_input(path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  if (!doc.contains("pairing")) throw Error(ErrorCode::kParse, path.string() + ": no pairing");
  return doc["pairing"].get<std::map<std::string, std::string>>();
}

void write_pairing(std::ostream& out, const std::map<std::string, std::string>& pairing) {
  out << json{{"pairing", pairing}}.dump(2) << '\n';
}

void write_matrix(std::ostream& out, const CorrelationMatrix& matrix) {
  out << "client_id";
  for (const auto& c : matrix.col_ids) out << ',' << csv::escape(c);
  out << '\n';
  char buf[32];
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    out << csv::escape(matrix.row_ids[r]);
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
      out << ',';
      if (auto v = matrix.at(r, c)) {
        std::snprintf(buf, sizeof buf, "%.6f", *v);
        out << buf;
      }
    }
    out << '\n';
  }
}

void write_matches(std::ostream& out, std::span<const MatchResult> matches) {
  for (const auto& m : matches) {
    json j;
    j["client_id"] = m.client_id;
    j["matched_server_id"] = m.matched_server_id ? json(*m.matched_server_id) : json();
    j["coefficient"] = m.coefficient ? json(*m.coefficient) : json();
    j["scenario"] = m.scenario.to_string();
    j["tie"] = m.tie;
    out << j.dump() << '\n';
  }
}

void write_accuracy(std::ostream& out, const AccuracyReport& r) {
  json j = {{"clients", r.clients},
            {"correct", r.correct},
            {"false_negatives", r.false_negatives},
            {"false_positives", r.false_positives},
            {"accuracy", r.accuracy},
            {"false_negative_rate", r.false_negative_rate},
            {"false_positive_rate", r.false_positive_rate}};
  out << j.dump(2) << '\n';
}

}  // namespace raptor::traffic
