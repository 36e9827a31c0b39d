#pragma once

#include "raptor/model.hpp"
#include "raptor/prefix_table.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace raptor {

/// Relay list CSV: `address,is_guard,is_exit,bandwidth,nickname`.
std::vector<RelayDescriptor> read_relays(std::istream& in);
std::vector<RelayDescriptor> read_relays(const std::filesystem::path& path);
void write_relays(std::ostream& out, const std::vector<RelayDescriptor>& relays);

/// `prefix,asn` CSV; serves both the IP-to-ASN mapping and origin maps.
PrefixTable<Asn> read_prefix_asn(std::istream& in);
PrefixTable<Asn> read_prefix_asn(const std::filesystem::path& path);
void write_prefix_asn(std::ostream& out, const PrefixTable<Asn>& table);

/// Opens a file for reading, throwing kIo when it cannot be opened.
std::ifstream open_input(const std::filesystem::path& path);

}  // namespace raptor
