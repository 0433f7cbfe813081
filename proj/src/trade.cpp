#include "scrapnet/trade.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

#include "scrapnet/country_codes.hpp"
#include "scrapnet/csv.hpp"

namespace scrapnet {

TimeWindow::TimeWindow(int start_year, int end_year) : start_(start_year), end_(end_year) {
  if (start_year > end_year) {
    throw std::invalid_argument("time window start " + std::to_string(start_year) + " is after end " +
                                std::to_string(end_year));
  }
}

std::string TimeWindow::label() const { return std::to_string(start_) + "-" + std::to_string(end_); }

std::vector<TimeWindow> TimeWindow::defaults() { return {{2007, 2011}, {2012, 2016}, {2017, 2021}}; }

namespace {

std::optional<int> parse_year(std::string_view text) {
  text = trim(text);
  int year = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), year);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) return std::nullopt;
  return year;
}

bool is_missing(std::string_view text) {
  text = trim(text);
  return text.empty() || text == "NA" || text == "NaN" || text == "nan" || text == "null";
}

std::string normalize_country(std::string_view raw, SkipReport& report) {
  auto code = std::string(trim(raw));
  if (auto a3 = to_alpha3(code)) return *a3;
  report.unknown_codes.insert(code);
  return code;
}

}  // namespace

TradeParseResult parse_trade_records(std::istream& in, const TradeSchema& schema) {
  const Table table = read_table(in, schema.delimiter);
  const std::size_t c_year = table.require(schema.year);
  const std::size_t c_exp = table.require(schema.exporter);
  const std::size_t c_imp = table.require(schema.importer);
  const std::size_t c_hs = table.require(schema.hs_code);
  const std::size_t c_val = table.require(schema.value);
  const std::size_t c_qty = table.require(schema.quantity);

  TradeParseResult result;
  auto& report = result.skipped;
  auto note = [&report](std::size_t line, const std::string& why) {
    if (report.messages.size() < 20) report.messages.push_back("line " + std::to_string(line) + ": " + why);
  };

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = r + 2;  // 1-based, after header
    if (row.size() != table.header.size()) {
      ++report.malformed;
      note(line, "expected " + std::to_string(table.header.size()) + " fields, got " + std::to_string(row.size()));
      continue;
    }
    if (is_missing(row[c_qty])) {
      ++report.missing_quantity;
      note(line, "missing quantity");
      continue;
    }
    auto qty = parse_number(row[c_qty]);
    auto year = parse_year(row[c_year]);
    if (!qty || *qty < 0.0 || !year) {
      ++report.malformed;
      note(line, "unparseable year or quantity");
      continue;
    }
    if (*year < schema.min_year || *year > schema.max_year) {
      ++report.out_of_range;
      note(line, "year " + std::to_string(*year) + " outside configured range");
      continue;
    }
    TradeRecord rec;
    rec.year = *year;
    rec.exporter = normalize_country(row[c_exp], report);
    rec.importer = normalize_country(row[c_imp], report);
    if (rec.exporter == rec.importer) {
      ++report.self_loops;
      note(line, "exporter equals importer");
      continue;
    }
    rec.hs_code = std::string(trim(row[c_hs]));
    rec.quantity = *qty;
    if (!is_missing(row[c_val])) rec.value = parse_number(row[c_val]);
    result.records.push_back(std::move(rec));
  }
  return result;
}

TradeParseResult parse_trade_file(const std::string& path, const TradeSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open '" + path + "'");
  return parse_trade_records(in, schema);
}

std::vector<TradeRecord> filter_commodity(std::span<const TradeRecord> records, std::string_view prefix) {
  if (prefix.empty()) throw std::invalid_argument("commodity prefix must be non-empty");
  std::vector<TradeRecord> out;
  for (const auto& r : records) {
    if (std::string_view(r.hs_code).starts_with(prefix)) out.push_back(r);
  }
  return out;
}

std::set<std::string> TradeNetwork::nodes() const {
  std::set<std::string> out;
  for (const auto& [pair, w] : edges) {
    out.insert(pair.first);
    out.insert(pair.second);
  }
  return out;
}

double TradeNetwork::total_weight() const {
  double total = 0.0;
  for (const auto& [pair, w] : edges) total += w;
  return total;
}

TradeNetwork build_network(std::span<const TradeRecord> records, const TimeWindow& window) {
  std::map<CountryPair, double> sums;
  for (const auto& r : records) {
    if (!window.contains(r.year) || r.exporter == r.importer) continue;
    sums[{r.exporter, r.importer}] += r.quantity;
  }
  TradeNetwork net{window, {}};
  const double years = window.length();
  for (auto& [pair, total] : sums) {
    if (total > 0.0) net.edges.emplace(pair, total / years);
  }
  return net;
}

std::vector<CountryTradeStats> country_totals(const TradeNetwork& network) {
  std::map<std::string, CountryTradeStats> by_country;
  for (const auto& [pair, w] : network.edges) {
    auto& exp = by_country[pair.first];
    exp.country = pair.first;
    exp.exports += w;
    auto& imp = by_country[pair.second];
    imp.country = pair.second;
    imp.imports += w;
  }
  std::vector<CountryTradeStats> out;
  out.reserve(by_country.size());
  for (auto& [c, s] : by_country) out.push_back(std::move(s));
  return out;
}

std::vector<YearFlows> country_time_series(std::span<const TradeRecord> records, std::string_view country,
                                           int first_year, int last_year) {
  std::vector<YearFlows> series;
  for (int y = first_year; y <= last_year; ++y) series.push_back({y, 0.0, 0.0});
  for (const auto& r : records) {
    if (r.year < first_year || r.year > last_year || r.exporter == r.importer) continue;
    auto& slot = series[static_cast<std::size_t>(r.year - first_year)];
    if (r.importer == country) slot.imports += r.quantity;
    if (r.exporter == country) slot.exports += r.quantity;
  }
  return series;
}

}  // namespace scrapnet
