#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scrapnet {

/// Raised when an input table lacks a required column or cannot be read.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A delimited table held in memory: header plus rows of string fields.
///
/// Quoting follows the usual CSV rules: fields may be wrapped in double
/// quotes, quotes inside quoted fields are doubled, and quoted fields may
/// contain the delimiter or line breaks.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of `name` in the header, or nullopt.
  std::optional<std::size_t> find(std::string_view name) const;
  /// Index of `name` in the header; throws SchemaError if absent.
  std::size_t require(std::string_view name) const;
};

Table read_table(std::istream& in, char delimiter = ',');
Table read_table_file(const std::string& path, char delimiter = ',');

void write_row(std::ostream& out, const std::vector<std::string>& fields, char delimiter = ',');
void write_table(std::ostream& out, const Table& table, char delimiter = ',');

/// Shortest round-trip decimal representation of `value`.
std::string format_number(double value);

/// Parses a finite number, tolerating surrounding whitespace. Empty, "NA",
/// "NaN" and garbage yield nullopt.
std::optional<double> parse_number(std::string_view text);

std::string_view trim(std::string_view text);

}  // namespace scrapnet
