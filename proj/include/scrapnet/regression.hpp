#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace scrapnet {

enum class Regressor { Exports, Imports, Firms, Employees, Revenue, BofCapacity };

/// Column name in observation tables ("exports_t", "n_firms", ...).
std::string_view column_name(Regressor r);
/// Row label in coefficient tables ("Exports 2017-2021", ...).
std::string_view display_label(Regressor r);
/// Accepts short names ("exports", "firms", "bof") or column names.
std::optional<Regressor> parse_regressor(std::string_view name);
/// All six, in coefficient-table order.
std::vector<Regressor> all_regressors();

/// One country. Capacity in kt/yr, trade in t/yr (window average), revenue
/// in USD, employees in persons.
struct CountryObservation {
  std::string country;
  double eaf_capacity = 0.0;
  std::optional<double> exports;
  std::optional<double> imports;
  std::optional<double> n_firms;
  std::optional<double> employees;
  std::optional<double> revenue;
  std::optional<double> bof_capacity;

  std::optional<double> value(Regressor r) const;
};

/// Reads an observation table. The header must use the unit-bearing names
/// country, eaf_capacity_kt, exports_t, imports_t, n_firms, employees,
/// revenue_usd, bof_capacity_kt; regressor columns may be absent. Throws
/// SchemaError on missing country/eaf_capacity_kt columns or negative values.
std::vector<CountryObservation> parse_observations(std::istream& in, char delimiter = ',');
std::vector<CountryObservation> parse_observations_file(const std::string& path, char delimiter = ',');

enum class Covariance { Classical, HC1 };

struct Coefficient {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;
};

struct RegressionFit {
  std::vector<Coefficient> coefficients;
  /// Set when fitted from observations; drives predict(fit, observation).
  std::vector<Regressor> regressors;
  std::vector<std::string> countries;
  std::vector<double> observed;
  std::vector<double> fitted;
  std::vector<double> residuals;
  /// Uncentered: 1 - RSS / sum(y^2).
  double r2 = 0.0;
  /// 1 - (1 - r2) * n / (n - k).
  double adjusted_r2 = 0.0;
  double sigma2 = 0.0;
  std::size_t n_observations = 0;
  std::size_t n_regressors = 0;
  Covariance covariance = Covariance::Classical;
  /// Residual sum of squares was zero to rounding; SEs are reported as 0.
  bool exact = false;
};

class SingularDesign : public std::runtime_error {
 public:
  SingularDesign(const std::string& what, std::vector<std::string> columns)
      : std::runtime_error(what), columns_(std::move(columns)) {}
  const std::vector<std::string>& columns() const { return columns_; }

 private:
  std::vector<std::string> columns_;
};

class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Least squares through the origin with t-based inference on n - k degrees
/// of freedom. Columns are equilibrated and solved by column-pivoted QR.
/// Throws InsufficientData if n <= k and SingularDesign (naming the
/// dependent columns) if X is rank deficient.
RegressionFit fit_through_origin(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 std::span<const std::string> names, Covariance covariance = Covariance::Classical);

/// Builds the design from the selected regressors and fits it. A selected
/// regressor missing for any observation throws std::invalid_argument.
RegressionFit fit_no_intercept(std::span<const CountryObservation> observations,
                               std::span<const Regressor> regressors, Covariance covariance = Covariance::Classical);

/// Coefficients dotted with `x`; sizes must match.
double predict(const RegressionFit& fit, std::span<const double> x);
/// Throws std::invalid_argument if the observation lacks a fitted regressor.
double predict(const RegressionFit& fit, const CountryObservation& observation);

}  // namespace scrapnet
