#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace raptor::csv {

/// Splits one CSV record. Double-quoted fields may contain commas and
/// doubled quotes.
std::vector<std::string> split(std::string_view line);

/// Quotes a field only when it needs it.
std::string escape(std::string_view field);

/// Line-oriented reader that skips blank lines and `#` metadata lines while
/// keeping track of physical line numbers for diagnostics.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Reads the next data record; false at end of input.
  bool next(std::vector<std::string>& fields);
  [[nodiscard]] std::size_t line_number() const { return line_; }
  [[nodiscard]] const std::string& raw() const { return raw_; }

 private:
  std::istream& in_;
  std::string raw_;
  std::size_t line_ = 0;
};

bool parse_bool(std::string_view text, bool& out);

}  // namespace raptor::csv
