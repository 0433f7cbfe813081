#include "scrapnet/report.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "scrapnet/country_codes.hpp"
#include "scrapnet/csv.hpp"

namespace scrapnet {

Format parse_format(std::string_view name) {
  if (name == "csv") return Format::Csv;
  if (name == "json") return Format::Json;
  if (name == "dot") return Format::Dot;
  throw UnknownFormat("unknown format '" + std::string(name) + "'; supported formats: csv, json, dot");
}

std::string_view extension(Format format) {
  switch (format) {
    case Format::Csv:
      return ".csv";
    case Format::Json:
      return ".json";
    case Format::Dot:
      return ".dot";
  }
  return "";
}

namespace {

std::string cell_text(const Cell& c) {
  if (auto s = std::get_if<std::string>(&c)) return *s;
  if (auto d = std::get_if<double>(&c)) return format_number(*d);
  return std::to_string(std::get<long long>(c));
}

nlohmann::ordered_json cell_json(const Cell& c) {
  if (auto s = std::get_if<std::string>(&c)) return *s;
  if (auto d = std::get_if<double>(&c)) {
    if (!std::isfinite(*d)) return format_number(*d);
    return *d;
  }
  return std::get<long long>(c);
}

Cell opt_cell(const std::optional<double>& v) {
  if (v) return *v;
  return std::string();
}

}  // namespace

std::string to_csv(const ReportTable& table, char delimiter) {
  std::ostringstream out;
  write_row(out, table.columns, delimiter);
  std::vector<std::string> fields;
  for (const auto& row : table.rows) {
    fields.clear();
    for (const auto& c : row) fields.push_back(cell_text(c));
    write_row(out, fields, delimiter);
  }
  return out.str();
}

std::string to_json(const ReportTable& table) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < table.columns.size() && i < row.size(); ++i) obj[table.columns[i]] = cell_json(row[i]);
    arr.push_back(std::move(obj));
  }
  return arr.dump(2) + "\n";
}

std::string render(const ReportTable& table, Format format) {
  switch (format) {
    case Format::Csv:
      return to_csv(table);
    case Format::Json:
      return to_json(table);
    case Format::Dot:
      break;
  }
  throw UnknownFormat("format 'dot' applies only to networks; supported formats for tables: csv, json");
}

ReportTable network_table(const TradeNetwork& network) {
  ReportTable t{{"exporter", "importer", "tonnes_per_year"}, {}};
  for (const auto& [pair, w] : network.edges) t.rows.push_back({pair.first, pair.second, w});
  return t;
}

ReportTable backbone_table(const TradeNetwork& backbone, const std::map<CountryPair, EdgeSignificance>& significance) {
  ReportTable t{{"exporter", "importer", "tonnes_per_year", "min_alpha"}, {}};
  for (const auto& [pair, w] : backbone.edges) {
    auto it = significance.find(pair);
    t.rows.push_back({pair.first, pair.second, w, it == significance.end() ? Cell(std::string()) : Cell(it->second.min_alpha())});
  }
  return t;
}

std::string to_dot(const TradeNetwork& network, const std::map<CountryPair, EdgeSignificance>& significance) {
  std::ostringstream out;
  out << "digraph \"scrap_trade_" << network.window.label() << "\" {\n";
  for (const auto& [pair, w] : network.edges) {
    out << "  \"" << pair.first << "\" -> \"" << pair.second << "\" [weight=" << format_number(w);
    if (auto it = significance.find(pair); it != significance.end()) {
      out << ", alpha=" << format_number(it->second.min_alpha());
    }
    out << "];\n";
  }
  out << "}\n";
  return out.str();
}

std::string render(const TradeNetwork& network, Format format,
                   const std::map<CountryPair, EdgeSignificance>& significance) {
  if (format == Format::Dot) return to_dot(network, significance);
  return render(significance.empty() ? network_table(network) : backbone_table(network, significance), format);
}

ReportTable country_stats_table(std::span<const CountryTradeStats> stats) {
  ReportTable t{{"country", "imports_t_per_year", "exports_t_per_year", "net_t_per_year"}, {}};
  for (const auto& s : stats) t.rows.push_back({s.country, s.imports, s.exports, s.net()});
  return t;
}

ReportTable time_series_table(const std::map<std::string, std::vector<YearFlows>>& series) {
  ReportTable t{{"country", "year", "imports_t", "exports_t"}, {}};
  for (const auto& [country, flows] : series) {
    for (const auto& f : flows) t.rows.push_back({country, static_cast<long long>(f.year), f.imports, f.exports});
  }
  return t;
}

ReportTable population_table(const FirmPopulation& population) {
  ReportTable t{{"id", "country", "naics4", "revenue_usd", "employees"}, {}};
  for (auto f : kDescriptionFields) t.columns.emplace_back(f);
  t.columns.emplace_back("match_fields");
  for (std::size_t i = 0; i < population.firms.size(); ++i) {
    const auto& f = population.firms[i];
    std::vector<Cell> row{f.id, f.country, f.naics4.value_or(""), opt_cell(f.revenue), opt_cell(f.employees)};
    for (const auto& d : f.descriptions) row.emplace_back(d);
    row.emplace_back(i < population.match_fields.size() ? population.match_fields[i] : std::string());
    t.rows.push_back(std::move(row));
  }
  return t;
}

ReportTable firm_aggregate_table(std::span<const CountryFirmAggregate> aggregates) {
  ReportTable t{{"country", "firms", "employees_persons", "revenue_usd", "employees_reported", "revenue_reported"}, {}};
  for (const auto& a : aggregates) {
    t.rows.push_back({a.country, static_cast<long long>(a.firms), a.employees, a.revenue,
                      static_cast<long long>(a.employees_reported), static_cast<long long>(a.revenue_reported)});
  }
  return t;
}

ReportTable naics_table(const NaicsShares& shares) {
  ReportTable t{{"naics4", "share"}, {}};
  for (const auto& [code, s] : shares.shares) t.rows.push_back({code, s});
  if (shares.missing > 0) t.rows.push_back({std::string("missing"), shares.missing_share});
  return t;
}

ReportTable topic_word_table(const LdaModel& model) {
  ReportTable t{{"topic", "token", "probability"}, {}};
  for (int k = 0; k < model.topics; ++k) {
    for (std::size_t w = 0; w < model.vocabulary.size(); ++w) {
      t.rows.push_back({static_cast<long long>(k), model.vocabulary[w],
                        model.topic_word(k, static_cast<Eigen::Index>(w))});
    }
  }
  return t;
}

ReportTable doc_topic_table(const LdaModel& model, std::span<const std::string> document_ids) {
  ReportTable t{{"document"}, {}};
  for (int k = 0; k < model.topics; ++k) t.columns.push_back("topic_" + std::to_string(k));
  for (Eigen::Index d = 0; d < model.doc_topic.rows(); ++d) {
    std::vector<Cell> row;
    auto idx = static_cast<std::size_t>(d);
    row.emplace_back(idx < document_ids.size() ? document_ids[idx] : std::to_string(d));
    for (int k = 0; k < model.topics; ++k) row.emplace_back(model.doc_topic(d, k));
    t.rows.push_back(std::move(row));
  }
  return t;
}

ReportTable top_terms_table(const LdaModel& model, std::size_t n) {
  ReportTable t{{"topic", "rank", "term", "weight"}, {}};
  for (int k = 0; k < model.topics; ++k) {
    long long rank = 1;
    for (const auto& tw : top_terms(model, k, n)) t.rows.push_back({static_cast<long long>(k), rank++, tw.term, tw.weight});
  }
  return t;
}

ReportTable perplexity_table(const TopicSelection& selection) {
  ReportTable t{{"topics", "held_out_perplexity", "selected"}, {}};
  for (auto [k, p] : selection.curve) {
    t.rows.push_back({static_cast<long long>(k), p, static_cast<long long>(k == selection.topics)});
  }
  return t;
}

ReportTable topic_contribution_table(const LdaModel& model) {
  ReportTable t{{"topic", "mean_document_share"}, {}};
  auto c = topic_contributions(model);
  for (std::size_t k = 0; k < c.size(); ++k) t.rows.push_back({static_cast<long long>(k), c[k]});
  return t;
}

ReportTable coefficient_table(const RegressionFit& fit) {
  ReportTable t{{"variable", "estimate", "sd", "p_value"}, {}};
  for (const auto& c : fit.coefficients) t.rows.push_back({c.name, c.estimate, c.std_error, c.p_value});
  return t;
}

ReportTable prediction_table(const RegressionFit& fit) {
  ReportTable t{{"country", "eaf_capacity_kt", "predicted_kt", "residual_kt"}, {}};
  for (std::size_t i = 0; i < fit.fitted.size(); ++i) {
    t.rows.push_back({i < fit.countries.size() ? fit.countries[i] : std::to_string(i), fit.observed[i], fit.fitted[i],
                      fit.residuals[i]});
  }
  return t;
}

ReportTable observation_table(std::span<const CountryObservation> observations) {
  ReportTable t{{"country", "eaf_capacity_kt"}, {}};
  for (auto r : all_regressors()) t.columns.emplace_back(column_name(r));
  for (const auto& o : observations) {
    std::vector<Cell> row{o.country, o.eaf_capacity};
    for (auto r : all_regressors()) row.push_back(opt_cell(o.value(r)));
    t.rows.push_back(std::move(row));
  }
  return t;
}

ReportTable extrapolation_table(std::span<const ExtrapolationResult> results, const ExtrapolationTotals& totals) {
  ReportTable t{{"country", "name", "planned_eaf_kt", "additional_companies", "additional_companies_rounded",
                 "additional_companies_mean", "additional_companies_sd", "revenue_median_usd", "revenue_q25_usd",
                 "revenue_q75_usd", "employees_median_persons", "employees_q25_persons", "employees_q75_persons",
                 "cdf_source"},
                {}};
  for (const auto& r : results) {
    std::string source = r.revenue_pooled || r.employees_pooled ? "pooled" : "country";
    t.rows.push_back({r.country, country_name(r.country), r.planned_eaf, r.companies.point, r.companies.rounded,
                      r.companies.mean, r.companies.sd, r.population.revenue.median, r.population.revenue.q25,
                      r.population.revenue.q75, r.population.employees.median, r.population.employees.q25,
                      r.population.employees.q75, source});
  }
  t.rows.push_back({std::string("Total"), std::string("Total"), totals.planned_eaf, totals.companies.point,
                    totals.companies.rounded, totals.companies.mean, totals.companies.sd, totals.revenue.median,
                    totals.revenue.q25, totals.revenue.q75, totals.employees.median, totals.employees.q25,
                    totals.employees.q75, std::string()});
  return t;
}

}  // namespace scrapnet
