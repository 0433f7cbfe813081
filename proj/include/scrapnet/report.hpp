#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "scrapnet/backbone.hpp"
#include "scrapnet/extrapolate.hpp"
#include "scrapnet/firms.hpp"
#include "scrapnet/regression.hpp"
#include "scrapnet/topics.hpp"
#include "scrapnet/trade.hpp"

namespace scrapnet {

using Cell = std::variant<std::string, double, long long>;

/// Typed table for export. Column names carry their units.
struct ReportTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

enum class Format { Csv, Json, Dot };

class UnknownFormat : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// "csv", "json" or "dot"; anything else throws UnknownFormat naming the
/// supported formats.
Format parse_format(std::string_view name);
std::string_view extension(Format format);

std::string to_csv(const ReportTable& table, char delimiter = ',');
/// Array of objects, one per row, keys in column order.
std::string to_json(const ReportTable& table);

/// Serializes a table; Dot is rejected (UnknownFormat) since it only applies
/// to networks.
std::string render(const ReportTable& table, Format format);

ReportTable network_table(const TradeNetwork& network);
/// Edge list plus the smaller of the two endpoint significance values.
ReportTable backbone_table(const TradeNetwork& backbone, const std::map<CountryPair, EdgeSignificance>& significance);
/// digraph with one `"A" -> "B" [weight=..., alpha=...];` line per edge.
/// `significance` may be empty, in which case alpha is omitted.
std::string to_dot(const TradeNetwork& network, const std::map<CountryPair, EdgeSignificance>& significance = {});
/// Network in any format: csv/json edge list or dot.
std::string render(const TradeNetwork& network, Format format,
                   const std::map<CountryPair, EdgeSignificance>& significance = {});

ReportTable country_stats_table(std::span<const CountryTradeStats> stats);
ReportTable time_series_table(const std::map<std::string, std::vector<YearFlows>>& series);

ReportTable population_table(const FirmPopulation& population);
ReportTable firm_aggregate_table(std::span<const CountryFirmAggregate> aggregates);
ReportTable naics_table(const NaicsShares& shares);

ReportTable topic_word_table(const LdaModel& model);
/// One row per document: document index, then one column per topic.
ReportTable doc_topic_table(const LdaModel& model, std::span<const std::string> document_ids);
ReportTable top_terms_table(const LdaModel& model, std::size_t n);
ReportTable perplexity_table(const TopicSelection& selection);
ReportTable topic_contribution_table(const LdaModel& model);

/// variable, estimate, sd, p_value
ReportTable coefficient_table(const RegressionFit& fit);
ReportTable prediction_table(const RegressionFit& fit);
ReportTable observation_table(std::span<const CountryObservation> observations);

/// Country rows followed by a "Total" row.
ReportTable extrapolation_table(std::span<const ExtrapolationResult> results, const ExtrapolationTotals& totals);

}  // namespace scrapnet
