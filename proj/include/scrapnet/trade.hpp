#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace scrapnet {

/// One bilateral flow as reported for a single year and HS product code.
/// Quantities are metric tonnes, values thousand USD.
struct TradeRecord {
  int year = 0;
  std::string exporter;
  std::string importer;
  std::string hs_code;
  double quantity = 0.0;
  std::optional<double> value;
};

/// Inclusive range of calendar years.
class TimeWindow {
 public:
  /// Throws std::invalid_argument if start > end.
  TimeWindow(int start_year, int end_year);

  int start_year() const { return start_; }
  int end_year() const { return end_; }
  int length() const { return end_ - start_ + 1; }
  bool contains(int year) const { return year >= start_ && year <= end_; }
  /// "2007-2011"
  std::string label() const;

  /// 2007-2011, 2012-2016, 2017-2021.
  static std::vector<TimeWindow> defaults();

  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;

 private:
  int start_;
  int end_;
};

/// Column mapping and validation bounds for a BACI-style trade file.
struct TradeSchema {
  std::string year = "t";
  std::string exporter = "i";
  std::string importer = "j";
  std::string hs_code = "k";
  std::string value = "v";
  std::string quantity = "q";
  char delimiter = ',';
  int min_year = 2007;
  int max_year = 2021;
};

/// Rows dropped while parsing, by reason. Nothing here is fatal.
struct SkipReport {
  std::size_t missing_quantity = 0;
  std::size_t malformed = 0;
  std::size_t self_loops = 0;
  std::size_t out_of_range = 0;
  /// Country codes absent from the code table; kept verbatim in records.
  std::set<std::string> unknown_codes;
  /// Up to the first 20 problem rows, "line N: reason".
  std::vector<std::string> messages;

  std::size_t total() const { return missing_quantity + malformed + self_loops + out_of_range; }
};

struct TradeParseResult {
  std::vector<TradeRecord> records;
  SkipReport skipped;
};

/// Parses delimited trade records with a header row. Country codes are
/// normalized to alpha-3. Throws SchemaError if a mapped column is missing.
TradeParseResult parse_trade_records(std::istream& in, const TradeSchema& schema = {});
TradeParseResult parse_trade_file(const std::string& path, const TradeSchema& schema = {});

/// Records whose HS code starts with `prefix`. Throws std::invalid_argument
/// on an empty prefix.
std::vector<TradeRecord> filter_commodity(std::span<const TradeRecord> records, std::string_view prefix = "7204");

using CountryPair = std::pair<std::string, std::string>;

/// Directed country graph of average annual flows (tonnes/year) over a
/// window. Every stored weight is > 0 and there are no self-loops.
struct TradeNetwork {
  TimeWindow window{2007, 2011};
  std::map<CountryPair, double> edges;

  std::set<std::string> nodes() const;
  double total_weight() const;
};

/// Sums quantities per pair over the window's years and divides by the full
/// window length; years without records contribute zero.
TradeNetwork build_network(std::span<const TradeRecord> records, const TimeWindow& window);

struct CountryTradeStats {
  std::string country;
  double imports = 0.0;
  double exports = 0.0;
  double net() const { return exports - imports; }
};

/// Per-node in/out strength, ordered by country code.
std::vector<CountryTradeStats> country_totals(const TradeNetwork& network);

struct YearFlows {
  int year = 0;
  double imports = 0.0;
  double exports = 0.0;
};

/// Tonnes in and out of `country` for every year in [first_year, last_year].
std::vector<YearFlows> country_time_series(std::span<const TradeRecord> records, std::string_view country,
                                           int first_year = 2007, int last_year = 2021);

}  // namespace scrapnet
