#include "raptor/dataset_io.hpp"

#include "raptor/csv.hpp"
#include "raptor/error.hpp"

#include <charconv>
#include <fstream>
#include <ostream>

namespace raptor {

namespace {

[[noreturn]] void fail(const csv::Reader& reader, const std::string& what) {
  throw Error(ErrorCode::kParse,
              "line " + std::to_string(reader.line_number()) + ": " + what + " in '" +
                  reader.raw() + "'");
}

}  // namespace

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return in;
}

std::vector<RelayDescriptor> read_relays(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> f;
  std::vector<RelayDescriptor> relays;
  bool first = true;
  while (reader.next(f)) {
    if (first && !f.empty() && f[0] == "address") {
      first = false;
      continue;
    }
    first = false;
    if (f.size() < 4) fail(reader, "expected at least 4 fields");
    RelayDescriptor r;
    auto addr = Ipv4Address::parse(f[0]);
    if (!addr) fail(reader, "bad address");
    r.address = *addr;
    if (!csv::parse_bool(f[1], r.is_guard) || !csv::parse_bool(f[2], r.is_exit)) {
      fail(reader, "bad flag");
    }
    try {
      std::size_t used = 0;
      r.bandwidth = std::stod(f[3], &used);
      if (used != f[3].size() || r.bandwidth < 0) fail(reader, "bad bandwidth");
    } catch (const std::logic_error&) {
      fail(reader, "bad bandwidth");
    }
    if (f.size() > 4) r.nickname = f[4];
    relays.push_back(std::move(r));
  }
  return relays;
}

std::vector<RelayDescriptor> read_relays(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_relays(in);
}

void write_relays(std::ostream& out, const std::vector<RelayDescriptor>& relays) {
  out << "address,is_guard,is_exit,bandwidth,nickname\n";
  for (const auto& r : relays) {
    out << r.address.to_string() << ',' << (r.is_guard ? "true" : "false") << ','
        << (r.is_exit ? "true" : "false") << ',' << r.bandwidth << ','
        << csv::escape(r.nickname) << '\n';
  }
}

PrefixTable<Asn> read_prefix_asn(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> f;
  PrefixTable<Asn> table;
  bool first = true;
  while (reader.next(f)) {
    if (first && !f.empty() && f[0] == "prefix") {
      first = false;
      continue;
    }
    first = false;
    if (f.size() < 2) fail(reader, "expected prefix,asn");
    auto prefix = IpPrefix::parse(f[0]);
    if (!prefix) fail(reader, "bad prefix");
    Asn asn = 0;
    auto [next, ec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), asn);
    if (ec != std::errc{} || next != f[1].data() + f[1].size()) fail(reader, "bad asn");
    table.insert(*prefix, asn);
  }
  return table;
}

PrefixTable<Asn> read_prefix_asn(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_prefix_asn(in);
}

void write_prefix_asn(std::ostream& out, const PrefixTable<Asn>& table) {
  out << "prefix,asn\n";
  table.for_each([&](const IpPrefix& p, Asn asn) {
    out << p.to_string() << ',' << asn << '\n';
  });
}

}  // namespace raptor
