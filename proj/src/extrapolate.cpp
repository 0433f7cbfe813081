#include "scrapnet/extrapolate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <tuple>

#include "scrapnet/country_codes.hpp"
#include "scrapnet/csv.hpp"
#include "scrapnet/random.hpp"

namespace scrapnet {

std::vector<CapacityPlan> parse_capacity_plans(std::istream& in, char delimiter) {
  const Table table = read_table(in, delimiter);
  const std::size_t c_country = table.require("country");
  const std::size_t c_planned = table.require("planned_eaf_kt");
  std::vector<CapacityPlan> out;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    if (row.size() != table.header.size()) {
      throw SchemaError("capacity line " + std::to_string(i + 2) + ": wrong field count");
    }
    if (trim(row[c_planned]).empty()) continue;
    auto planned = parse_number(row[c_planned]);
    if (!planned || *planned < 0) {
      throw SchemaError("capacity line " + std::to_string(i + 2) + ": planned_eaf_kt must be a non-negative number");
    }
    auto code = std::string(trim(row[c_country]));
    out.push_back({to_alpha3(code).value_or(code), *planned});
  }
  return out;
}

std::vector<CapacityPlan> parse_capacity_plans_file(const std::string& path, char delimiter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open '" + path + "'");
  return parse_capacity_plans(in, delimiter);
}

EmpiricalCdf::EmpiricalCdf(std::span<const double> values) {
  for (double v : values) {
    if (std::isnan(v)) continue;
    if (!std::isfinite(v)) throw std::invalid_argument("empirical CDF values must be finite");
    values_.push_back(v);
  }
  if (values_.empty()) throw std::invalid_argument("empirical CDF needs at least one value");
  std::sort(values_.begin(), values_.end());
}

double EmpiricalCdf::operator()(double x) const {
  auto it = std::upper_bound(values_.begin(), values_.end(), x);
  return static_cast<double>(it - values_.begin()) / static_cast<double>(values_.size());
}

double EmpiricalCdf::inverse(double u) const {
  if (!(u >= 0.0 && u < 1.0)) throw std::domain_error("inverse CDF argument must lie in [0, 1)");
  const double n = static_cast<double>(values_.size());
  auto idx = static_cast<std::ptrdiff_t>(std::ceil(u * n)) - 1;
  idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(values_.size()) - 1);
  return values_[static_cast<std::size_t>(idx)];
}

double round_half_up(double x) { return std::floor(x + 0.5); }

std::vector<double> draw_coefficients(double mean, double sd, std::size_t n, std::uint64_t seed) {
  if (!(mean > 0.0)) throw std::invalid_argument("coefficient mean must be positive");
  if (sd < 0.0) throw std::invalid_argument("coefficient sd must be non-negative");
  Rng rng(seed);
  std::vector<double> draws;
  draws.reserve(n);
  while (draws.size() < n) {
    double d = rng.normal(mean, sd);
    if (d > 0.0) draws.push_back(d);
  }
  return draws;
}

namespace {

std::pair<double, double> mean_sd(std::span<const double> xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

}  // namespace

CompanyEstimate companies_from_draws(const CapacityPlan& plan, double beta_firms, std::span<const double> draws) {
  if (plan.planned_eaf < 0.0) throw std::domain_error("planned EAF capacity must be non-negative");
  if (!(beta_firms > 0.0)) throw std::invalid_argument("firm coefficient must be positive");
  CompanyEstimate est;
  est.point = plan.planned_eaf / beta_firms;
  est.rounded = round_half_up(est.point);
  est.samples.reserve(draws.size());
  for (double d : draws) est.samples.push_back(plan.planned_eaf / d);
  std::tie(est.mean, est.sd) = mean_sd(est.samples);
  return est;
}

CompanyEstimate additional_companies(const CapacityPlan& plan, double beta_firms, double beta_sd, std::size_t n_draws,
                                     std::uint64_t seed) {
  if (n_draws < 1) throw std::invalid_argument("need at least one coefficient draw");
  if (plan.planned_eaf < 0.0) throw std::domain_error("planned EAF capacity must be non-negative");
  return companies_from_draws(plan, beta_firms, draw_coefficients(beta_firms, beta_sd, n_draws, seed));
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double h = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0) return values[lo];
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

Quartiles quartiles(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  return {percentile(v, 0.5), percentile(v, 0.25), percentile(v, 0.75)};
}

PopulationSimulation simulate_population(std::size_t n_companies, const EmpiricalCdf& revenue,
                                         const EmpiricalCdf& employees, const SimulationOptions& options) {
  PopulationSimulation sim;
  sim.revenue_sums.resize(options.iterations, 0.0);
  sim.employee_sums.resize(options.iterations, 0.0);
  for (std::size_t it = 0; it < options.iterations; ++it) {
    Rng rng(derive_seed(options.seed, {it}));
    double rev = 0.0, emp = 0.0;
    for (std::size_t f = 0; f < n_companies; ++f) {
      const double u = rng.uniform();
      rev += revenue.inverse(u);
      emp += employees.inverse(options.coupling == Coupling::Rank ? u : rng.uniform());
    }
    sim.revenue_sums[it] = rev;
    sim.employee_sums[it] = emp;
  }
  sim.revenue = quartiles(sim.revenue_sums);
  sim.employees = quartiles(sim.employee_sums);
  return sim;
}

FirmDistributions::FirmDistributions(const FirmPopulation& population, std::size_t min_country_firms,
                                     const std::set<std::string>& pool_countries) {
  std::map<std::string, std::vector<double>> rev, emp;
  std::vector<double> pool_rev, pool_emp;
  for (const auto& f : population.firms) {
    const bool pooled = pool_countries.empty() || pool_countries.contains(f.country);
    if (f.revenue) {
      rev[f.country].push_back(*f.revenue);
      if (pooled) pool_rev.push_back(*f.revenue);
    }
    if (f.employees) {
      emp[f.country].push_back(*f.employees);
      if (pooled) pool_emp.push_back(*f.employees);
    }
  }
  const std::size_t min_n = std::max<std::size_t>(1, min_country_firms);
  for (const auto& [c, v] : rev) {
    if (v.size() >= min_n) revenue_.emplace(c, EmpiricalCdf(v));
  }
  for (const auto& [c, v] : emp) {
    if (v.size() >= min_n) employees_.emplace(c, EmpiricalCdf(v));
  }
  if (!pool_rev.empty()) pooled_revenue_.emplace(pool_rev);
  if (!pool_emp.empty()) pooled_employees_.emplace(pool_emp);
}

FirmDistributions::Choice FirmDistributions::for_country(const std::string& country) const {
  Choice c{};
  if (auto it = revenue_.find(country); it != revenue_.end()) {
    c.revenue = &it->second;
  } else if (pooled_revenue_) {
    c.revenue = &*pooled_revenue_;
    c.revenue_pooled = true;
  } else {
    throw std::invalid_argument("no revenue distribution available for " + country);
  }
  if (auto it = employees_.find(country); it != employees_.end()) {
    c.employees = &it->second;
  } else if (pooled_employees_) {
    c.employees = &*pooled_employees_;
    c.employees_pooled = true;
  } else {
    throw std::invalid_argument("no employee distribution available for " + country);
  }
  return c;
}

std::set<std::string> FirmDistributions::european_pool() {
  return {"AUT", "BEL", "BGR", "HRV", "CYP", "CZE", "DNK", "EST", "FIN", "FRA", "DEU", "GRC", "HUN", "IRL",
          "ITA", "LVA", "LTU", "LUX", "MLT", "NLD", "POL", "PRT", "ROU", "SVK", "SVN", "ESP", "SWE", "GBR"};
}

std::vector<ExtrapolationResult> extrapolate(std::span<const CapacityPlan> plans, const FirmDistributions& firms,
                                             const ExtrapolationConfig& config) {
  if (config.coefficient_draws < 1) throw std::invalid_argument("need at least one coefficient draw");
  std::vector<double> shared;
  if (config.shared_draws) {
    shared = draw_coefficients(config.beta_firms, config.beta_sd, config.coefficient_draws,
                               derive_seed(config.seed, {fnv1a("coefficient")}));
  }
  std::vector<ExtrapolationResult> out;
  for (const auto& plan : plans) {
    ExtrapolationResult r;
    r.country = plan.country;
    r.planned_eaf = plan.planned_eaf;
    if (config.shared_draws) {
      r.companies = companies_from_draws(plan, config.beta_firms, shared);
    } else {
      r.companies = companies_from_draws(
          plan, config.beta_firms,
          draw_coefficients(config.beta_firms, config.beta_sd, config.coefficient_draws,
                            derive_seed(config.seed, {fnv1a("coefficient"), fnv1a(plan.country)})));
    }
    r.simulated_companies = static_cast<std::size_t>(r.companies.rounded);
    auto choice = firms.for_country(plan.country);
    r.revenue_pooled = choice.revenue_pooled;
    r.employees_pooled = choice.employees_pooled;
    SimulationOptions sim{config.iterations, derive_seed(config.seed, {fnv1a("population"), fnv1a(plan.country)}),
                          config.coupling};
    r.population = simulate_population(r.simulated_companies, *choice.revenue, *choice.employees, sim);
    out.push_back(std::move(r));
  }
  return out;
}

ExtrapolationTotals aggregate_totals(std::span<const ExtrapolationResult> results, double beta_firms) {
  if (!(beta_firms > 0.0)) throw std::invalid_argument("firm coefficient must be positive");
  ExtrapolationTotals t;
  if (results.empty()) return t;
  const std::size_t draws = results.front().companies.samples.size();
  const std::size_t iterations = results.front().population.revenue_sums.size();
  std::vector<double> company_sum(draws, 0.0), revenue_sum(iterations, 0.0), employee_sum(iterations, 0.0);
  for (const auto& r : results) {
    if (r.companies.samples.size() != draws || r.population.revenue_sums.size() != iterations ||
        r.population.employee_sums.size() != iterations) {
      throw std::invalid_argument("results carry different sample counts");
    }
    t.planned_eaf += r.planned_eaf;
    for (std::size_t i = 0; i < draws; ++i) company_sum[i] += r.companies.samples[i];
    for (std::size_t i = 0; i < iterations; ++i) {
      revenue_sum[i] += r.population.revenue_sums[i];
      employee_sum[i] += r.population.employee_sums[i];
    }
  }
  t.companies.point = t.planned_eaf / beta_firms;
  t.companies.rounded = round_half_up(t.companies.point);
  std::tie(t.companies.mean, t.companies.sd) = mean_sd(company_sum);
  t.companies.samples = std::move(company_sum);
  t.revenue = quartiles(revenue_sum);
  t.employees = quartiles(employee_sum);
  return t;
}

}  // namespace scrapnet
