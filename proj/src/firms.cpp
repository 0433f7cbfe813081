#include "scrapnet/firms.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "scrapnet/country_codes.hpp"
#include "scrapnet/csv.hpp"

namespace scrapnet {

bool FirmRecord::has_description() const {
  return std::any_of(descriptions.begin(), descriptions.end(), [](const auto& d) { return !trim(d).empty(); });
}

std::string FirmRecord::combined_description() const {
  std::string out;
  for (const auto& d : descriptions) {
    auto t = trim(d);
    if (t.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out.append(t);
  }
  return out;
}

RegistryParseResult parse_registry(std::istream& in, const RegistrySchema& schema) {
  const Table table = read_table(in, schema.delimiter);
  const std::size_t c_id = table.require(schema.id);
  const std::size_t c_country = table.require(schema.country);
  const auto c_naics = table.find(schema.naics);
  const auto c_revenue = table.find(schema.revenue);
  const auto c_employees = table.find(schema.employees);
  std::array<std::size_t, kDescriptionFields.size()> c_desc{};
  for (std::size_t i = 0; i < kDescriptionFields.size(); ++i) c_desc[i] = table.require(kDescriptionFields[i]);

  RegistryParseResult result;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    auto reject = [&](const std::string& why) {
      ++result.skipped;
      if (result.messages.size() < 20) result.messages.push_back("line " + std::to_string(r + 2) + ": " + why);
    };
    if (row.size() != table.header.size()) {
      reject("wrong field count");
      continue;
    }
    FirmRecord firm;
    firm.id = std::string(trim(row[c_id]));
    auto country = std::string(trim(row[c_country]));
    firm.country = to_alpha3(country).value_or(country);
    if (c_naics) {
      auto code = trim(row[*c_naics]);
      if (!code.empty() && code != "NA") firm.naics4 = std::string(code.substr(0, 4));
    }
    if (c_revenue) firm.revenue = parse_number(row[*c_revenue]);
    if (c_employees) firm.employees = parse_number(row[*c_employees]);
    if ((firm.revenue && *firm.revenue < 0) || (firm.employees && *firm.employees < 0)) {
      reject("negative revenue or employees");
      continue;
    }
    for (std::size_t i = 0; i < c_desc.size(); ++i) firm.descriptions[i] = row[c_desc[i]];
    result.firms.push_back(std::move(firm));
  }
  return result;
}

RegistryParseResult parse_registry_file(const std::string& path, const RegistrySchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open '" + path + "'");
  return parse_registry(in, schema);
}

std::vector<std::string> letter_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (c >= 0x80 || std::isalpha(c)) {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

FirmPopulation match_scrap_firms(std::span<const FirmRecord> records, const MatchRule& rule, std::string provenance) {
  if (rule.keyword.empty()) throw std::invalid_argument("match keyword must be non-empty");
  std::string keyword = rule.keyword;
  std::transform(keyword.begin(), keyword.end(), keyword.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });

  auto field_matches = [&](std::string_view text) {
    for (const auto& tok : letter_tokens(text)) {
      if (!std::string_view(tok).starts_with(keyword)) continue;
      if (std::find(rule.exclusions.begin(), rule.exclusions.end(), tok) != rule.exclusions.end()) continue;
      return true;
    }
    return false;
  };

  FirmPopulation pop;
  pop.provenance = std::move(provenance);
  for (const auto& firm : records) {
    if (!firm.has_description()) continue;
    std::string matched;
    for (std::size_t i = 0; i < firm.descriptions.size(); ++i) {
      if (!field_matches(firm.descriptions[i])) continue;
      if (!matched.empty()) matched.push_back(';');
      matched.append(kDescriptionFields[i]);
    }
    if (matched.empty()) continue;
    pop.firms.push_back(firm);
    pop.match_fields.push_back(std::move(matched));
  }
  return pop;
}

NaicsShares naics_distribution(const FirmPopulation& population) {
  NaicsShares out;
  if (population.firms.empty()) return out;
  std::map<std::string, std::size_t> counts;
  for (const auto& f : population.firms) {
    if (f.naics4) {
      ++counts[*f.naics4];
      ++out.coded;
    } else {
      ++out.missing;
    }
  }
  for (const auto& [code, n] : counts) out.shares[code] = static_cast<double>(n) / static_cast<double>(out.coded);
  out.missing_share = static_cast<double>(out.missing) / static_cast<double>(population.firms.size());
  return out;
}

std::vector<CountryFirmAggregate> country_aggregates(const FirmPopulation& population) {
  std::map<std::string, CountryFirmAggregate> by_country;
  for (const auto& f : population.firms) {
    auto& agg = by_country[f.country];
    agg.country = f.country;
    ++agg.firms;
    if (f.employees) {
      agg.employees += *f.employees;
      ++agg.employees_reported;
    }
    if (f.revenue) {
      agg.revenue += *f.revenue;
      ++agg.revenue_reported;
    }
  }
  std::vector<CountryFirmAggregate> out;
  out.reserve(by_country.size());
  for (auto& [c, agg] : by_country) out.push_back(std::move(agg));
  return out;
}

Correlation pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: sequences differ in length");
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::isnan(x[i]) || std::isnan(y[i])) continue;
    pairs.emplace_back(x[i], y[i]);
  }
  const std::size_t n = pairs.size();
  if (n < 3) throw std::invalid_argument("pearson: need at least 3 complete pairs");

  double mx = 0.0, my = 0.0;
  for (auto [a, b] : pairs) {
    mx += a;
    my += b;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (auto [a, b] : pairs) {
    sxy += (a - mx) * (b - my);
    sxx += (a - mx) * (a - mx);
    syy += (b - my) * (b - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedCorrelation("pearson: zero variance");

  Correlation c;
  c.n = n;
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double df = static_cast<double>(n - 2);
  if (std::abs(c.r) >= 1.0) {
    c.p_value = 0.0;
  } else {
    const double t = c.r * std::sqrt(df / (1.0 - c.r * c.r));
    boost::math::students_t dist(df);
    c.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  }
  return c;
}

std::vector<double> revenue_column(const FirmPopulation& population) {
  std::vector<double> out;
  out.reserve(population.firms.size());
  for (const auto& f : population.firms) out.push_back(f.revenue.value_or(std::numeric_limits<double>::quiet_NaN()));
  return out;
}

std::vector<double> employee_column(const FirmPopulation& population) {
  std::vector<double> out;
  out.reserve(population.firms.size());
  for (const auto& f : population.firms) out.push_back(f.employees.value_or(std::numeric_limits<double>::quiet_NaN()));
  return out;
}

}  // namespace scrapnet
