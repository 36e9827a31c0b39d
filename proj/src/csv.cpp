#include "raptor/csv.hpp"

#include <algorithm>
#include <cctype>

namespace raptor::csv {

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

bool Reader::next(std::vector<std::string>& fields) {
  while (std::getline(in_, raw_)) {
    ++line_;
    const auto first = raw_.find_first_not_of(" \t\r");
    if (first == std::string::npos || raw_[first] == '#') continue;
    fields = split(raw_);
    return true;
  }
  return false;
}

bool parse_bool(std::string_view text, bool& out) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "1" || lower == "true" || lower == "yes") {
    out = true;
    return true;
  }
  if (lower == "0" || lower == "false" || lower == "no") {
    out = false;
    return true;
  }
  return false;
}

}  // namespace raptor::csv
