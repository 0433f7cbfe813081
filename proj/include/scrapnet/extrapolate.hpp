#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "scrapnet/firms.hpp"

namespace scrapnet {

struct CapacityPlan {
  std::string country;
  double planned_eaf = 0.0;  // kt / yr
};

/// Reads columns country, planned_eaf_kt. Other columns are ignored; rows
/// with an empty planned value are skipped. Throws SchemaError on missing
/// columns or negative capacity.
std::vector<CapacityPlan> parse_capacity_plans(std::istream& in, char delimiter = ',');
std::vector<CapacityPlan> parse_capacity_plans_file(const std::string& path, char delimiter = ',');

/// Right-continuous step CDF with a 1/n jump at each sorted sample value.
class EmpiricalCdf {
 public:
  /// NaN entries are skipped; throws std::invalid_argument if nothing finite
  /// remains or a value is infinite.
  explicit EmpiricalCdf(std::span<const double> values);

  /// Fraction of samples <= x.
  double operator()(double x) const;
  /// Smallest sample v with CDF(v) >= u. Throws std::domain_error unless
  /// 0 <= u < 1.
  double inverse(double u) const;

  std::span<const double> sorted_values() const { return values_; }
  std::size_t size() const { return values_.size(); }

 private:
  std::vector<double> values_;
};

inline EmpiricalCdf empirical_cdf(std::span<const double> values) { return EmpiricalCdf(values); }
inline double inverse_sample(const EmpiricalCdf& cdf, double u) { return cdf.inverse(u); }

/// Half-up rounding used for reporting company counts.
double round_half_up(double x);

/// Draws from N(mean, sd), redrawing non-positive values.
std::vector<double> draw_coefficients(double mean, double sd, std::size_t n, std::uint64_t seed);

struct CompanyEstimate {
  double point = 0.0;    // planned / beta
  double rounded = 0.0;  // round_half_up(point)
  double mean = 0.0;     // over coefficient draws
  double sd = 0.0;
  /// planned / draw for every coefficient draw.
  std::vector<double> samples;
};

/// Company count implied by a plan for the given coefficient draws. Throws
/// std::domain_error on negative capacity, std::invalid_argument if beta <= 0.
CompanyEstimate companies_from_draws(const CapacityPlan& plan, double beta_firms, std::span<const double> draws);

/// Same, drawing its own n_draws coefficients from N(beta_firms, beta_sd).
CompanyEstimate additional_companies(const CapacityPlan& plan, double beta_firms, double beta_sd, std::size_t n_draws,
                                     std::uint64_t seed);

struct Quartiles {
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

/// Linear-interpolation percentile (p in [0, 1]) of an unsorted sample.
double percentile(std::vector<double> values, double p);
Quartiles quartiles(std::span<const double> values);

enum class Coupling {
  /// Revenue and employees drawn with separate uniforms.
  Independent,
  /// One uniform per firm for both variables (comonotone).
  Rank,
};

struct SimulationOptions {
  std::size_t iterations = 1000;
  std::uint64_t seed = 0;
  Coupling coupling = Coupling::Independent;
};

struct PopulationSimulation {
  std::vector<double> revenue_sums;
  std::vector<double> employee_sums;
  Quartiles revenue;
  Quartiles employees;
};

/// For each iteration draws n_companies firms by inverse transform from the
/// two CDFs and sums them. Iteration i uses its own substream derived from
/// (seed, i).
PopulationSimulation simulate_population(std::size_t n_companies, const EmpiricalCdf& revenue,
                                         const EmpiricalCdf& employees, const SimulationOptions& options);

/// Revenue and employee samples available to each country.
class FirmDistributions {
 public:
  /// Countries with at least `min_country_firms` observed values of a
  /// variable get their own CDF for it; others use the pool, built from
  /// firms in `pool_countries` (all firms when that set is empty).
  FirmDistributions(const FirmPopulation& population, std::size_t min_country_firms,
                    const std::set<std::string>& pool_countries);

  struct Choice {
    const EmpiricalCdf* revenue;
    const EmpiricalCdf* employees;
    bool revenue_pooled;
    bool employees_pooled;
  };
  /// Throws std::invalid_argument if the pool is empty and the country has
  /// no CDF of its own.
  Choice for_country(const std::string& country) const;

  /// EU-27 plus the United Kingdom.
  static std::set<std::string> european_pool();

 private:
  std::map<std::string, EmpiricalCdf> revenue_;
  std::map<std::string, EmpiricalCdf> employees_;
  std::optional<EmpiricalCdf> pooled_revenue_;
  std::optional<EmpiricalCdf> pooled_employees_;
};

struct ExtrapolationConfig {
  double beta_firms = 79.0;
  double beta_sd = 11.0;
  std::size_t coefficient_draws = 10000;
  std::size_t iterations = 1000;
  std::uint64_t seed = 0;
  Coupling coupling = Coupling::Independent;
  /// One coefficient draw per iteration common to all countries. When false
  /// every country gets its own draws.
  bool shared_draws = true;
};

struct ExtrapolationResult {
  std::string country;
  double planned_eaf = 0.0;
  CompanyEstimate companies;
  /// Firms simulated: companies.rounded.
  std::size_t simulated_companies = 0;
  PopulationSimulation population;
  bool revenue_pooled = false;
  bool employees_pooled = false;
};

struct ExtrapolationTotals {
  double planned_eaf = 0.0;
  CompanyEstimate companies;
  Quartiles revenue;
  Quartiles employees;
};

/// Per-country company estimates and simulated populations.
std::vector<ExtrapolationResult> extrapolate(std::span<const CapacityPlan> plans, const FirmDistributions& firms,
                                             const ExtrapolationConfig& config);

/// Sums company samples draw by draw and population sums iteration by
/// iteration across countries before summarizing. All results must carry
/// equally many samples.
ExtrapolationTotals aggregate_totals(std::span<const ExtrapolationResult> results, double beta_firms);

}  // namespace scrapnet
