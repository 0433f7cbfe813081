#pragma once

#include <array>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scrapnet {

/// Registry description columns, in file order.
inline constexpr std::array<std::string_view, 4> kDescriptionFields = {
    "Full Overview", "Main Products and Services", "Main Activity", "Primary Business Line"};

struct FirmRecord {
  std::string id;
  std::string country;  // alpha-3
  std::optional<std::string> naics4;
  std::optional<double> revenue;    // USD / year
  std::optional<double> employees;  // persons
  std::array<std::string, kDescriptionFields.size()> descriptions;

  bool has_description() const;
  /// Non-empty description fields joined by a single space.
  std::string combined_description() const;
};

struct RegistrySchema {
  std::string id = "id";
  std::string country = "country";
  std::string naics = "naics4";
  std::string revenue = "revenue_usd";
  std::string employees = "employees";
  char delimiter = ',';
};

struct RegistryParseResult {
  std::vector<FirmRecord> firms;
  /// Rows with a wrong field count or negative revenue/employees.
  std::size_t skipped = 0;
  std::vector<std::string> messages;
};

/// Reads a firm registry. Missing description columns are a SchemaError;
/// an absent naics/revenue/employees column leaves that field unset.
RegistryParseResult parse_registry(std::istream& in, const RegistrySchema& schema = {});
RegistryParseResult parse_registry_file(const std::string& path, const RegistrySchema& schema = {});

/// Lowercased runs of letters. Bytes outside ASCII count as letters so that
/// accented words stay whole.
std::vector<std::string> letter_tokens(std::string_view text);

struct MatchRule {
  std::string keyword = "scrap";
  std::vector<std::string> exclusions = {"scraper", "scrapers"};
};

struct FirmPopulation {
  std::vector<FirmRecord> firms;
  /// Parallel to `firms`: the description fields that matched, ';'-joined.
  std::vector<std::string> match_fields;
  std::string provenance;
};

/// A firm matches if some description field has a token starting with the
/// keyword that is not an excluded token. Firms without any description are
/// never admitted. Throws std::invalid_argument on an empty keyword.
FirmPopulation match_scrap_firms(std::span<const FirmRecord> records, const MatchRule& rule = {},
                                 std::string provenance = {});

struct NaicsShares {
  /// Shares among firms with a code; sums to 1.
  std::map<std::string, double> shares;
  /// Fraction of all firms without a code.
  double missing_share = 0.0;
  std::size_t coded = 0;
  std::size_t missing = 0;
};

NaicsShares naics_distribution(const FirmPopulation& population);

struct CountryFirmAggregate {
  std::string country;
  std::size_t firms = 0;
  double employees = 0.0;
  double revenue = 0.0;
  std::size_t employees_reported = 0;
  std::size_t revenue_reported = 0;
};

/// Per-country counts and sums; missing values are left out of the sums.
std::vector<CountryFirmAggregate> country_aggregates(const FirmPopulation& population);

class UndefinedCorrelation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct Correlation {
  double r = 0.0;
  /// Two-sided, Student t with n - 2 degrees of freedom.
  double p_value = 1.0;
  std::size_t n = 0;
};

/// Pearson product-moment correlation. NaN marks a missing value; pairs with
/// any NaN are dropped. Needs at least 3 complete pairs (std::invalid_argument)
/// and non-zero variance in both (UndefinedCorrelation).
Correlation pearson(std::span<const double> x, std::span<const double> y);

/// Revenue and employee columns of a population, NaN where missing.
std::vector<double> revenue_column(const FirmPopulation& population);
std::vector<double> employee_column(const FirmPopulation& population);

}  // namespace scrapnet
