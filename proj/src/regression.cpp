#include "scrapnet/regression.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "scrapnet/country_codes.hpp"
#include "scrapnet/csv.hpp"

namespace scrapnet {

namespace {

struct RegressorInfo {
  Regressor id;
  std::string_view column;
  std::string_view label;
  std::string_view short_name;
};

constexpr RegressorInfo kRegressors[] = {
    {Regressor::Exports, "exports_t", "Exports 2017-2021", "exports"},
    {Regressor::Imports, "imports_t", "Imports 2017-2021", "imports"},
    {Regressor::Firms, "n_firms", "Number of companies", "firms"},
    {Regressor::Employees, "employees", "Number of employees", "employees"},
    {Regressor::Revenue, "revenue_usd", "Operating revenue", "revenue"},
    {Regressor::BofCapacity, "bof_capacity_kt", "BOF capacity", "bof"},
};

const RegressorInfo& info(Regressor r) { return kRegressors[static_cast<std::size_t>(r)]; }

}  // namespace

std::string_view column_name(Regressor r) { return info(r).column; }
std::string_view display_label(Regressor r) { return info(r).label; }

std::optional<Regressor> parse_regressor(std::string_view name) {
  for (const auto& r : kRegressors) {
    if (name == r.column || name == r.short_name) return r.id;
  }
  if (name == "n_companies" || name == "companies") return Regressor::Firms;
  if (name == "bof_capacity") return Regressor::BofCapacity;
  return std::nullopt;
}

std::vector<Regressor> all_regressors() {
  std::vector<Regressor> out;
  for (const auto& r : kRegressors) out.push_back(r.id);
  return out;
}

std::optional<double> CountryObservation::value(Regressor r) const {
  switch (r) {
    case Regressor::Exports:
      return exports;
    case Regressor::Imports:
      return imports;
    case Regressor::Firms:
      return n_firms;
    case Regressor::Employees:
      return employees;
    case Regressor::Revenue:
      return revenue;
    case Regressor::BofCapacity:
      return bof_capacity;
  }
  return std::nullopt;
}

std::vector<CountryObservation> parse_observations(std::istream& in, char delimiter) {
  const Table table = read_table(in, delimiter);
  const std::size_t c_country = table.require("country");
  const std::size_t c_eaf = table.require("eaf_capacity_kt");
  std::vector<std::pair<Regressor, std::size_t>> columns;
  for (auto r : all_regressors()) {
    if (auto c = table.find(column_name(r))) columns.emplace_back(r, *c);
  }

  std::vector<CountryObservation> out;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::string where = "observation line " + std::to_string(i + 2);
    if (row.size() != table.header.size()) throw SchemaError(where + ": wrong field count");
    CountryObservation obs;
    auto code = std::string(trim(row[c_country]));
    obs.country = to_alpha3(code).value_or(code);
    auto eaf = parse_number(row[c_eaf]);
    if (!eaf || *eaf < 0) throw SchemaError(where + ": eaf_capacity_kt must be a non-negative number");
    obs.eaf_capacity = *eaf;
    for (auto [r, c] : columns) {
      auto v = parse_number(row[c]);
      if (v && *v < 0) throw SchemaError(where + ": negative " + std::string(column_name(r)));
      switch (r) {
        case Regressor::Exports:
          obs.exports = v;
          break;
        case Regressor::Imports:
          obs.imports = v;
          break;
        case Regressor::Firms:
          obs.n_firms = v;
          break;
        case Regressor::Employees:
          obs.employees = v;
          break;
        case Regressor::Revenue:
          obs.revenue = v;
          break;
        case Regressor::BofCapacity:
          obs.bof_capacity = v;
          break;
      }
    }
    out.push_back(std::move(obs));
  }
  return out;
}

std::vector<CountryObservation> parse_observations_file(const std::string& path, char delimiter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open '" + path + "'");
  return parse_observations(in, delimiter);
}

RegressionFit fit_through_origin(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::span<const std::string> names,
                                 Covariance covariance) {
  const Eigen::Index n = X.rows();
  const Eigen::Index k = X.cols();
  if (y.size() != n) throw std::invalid_argument("design and response differ in row count");
  if (static_cast<Eigen::Index>(names.size()) != k) throw std::invalid_argument("one name per design column required");
  if (k == 0) throw std::invalid_argument("no regressors selected");
  if (n <= k) {
    throw InsufficientData("need more observations than regressors (n = " + std::to_string(n) +
                           ", k = " + std::to_string(k) + ")");
  }

  Eigen::VectorXd scale = X.colwise().norm().transpose();
  std::vector<std::string> zero_columns;
  for (Eigen::Index j = 0; j < k; ++j) {
    if (scale(j) == 0.0) {
      zero_columns.push_back(names[static_cast<std::size_t>(j)]);
      scale(j) = 1.0;
    }
  }
  if (!zero_columns.empty()) throw SingularDesign("design has all-zero columns", zero_columns);

  const Eigen::MatrixXd Xs = X * scale.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xs);
  qr.setThreshold(1e-10);
  if (qr.rank() < k) {
    std::vector<std::string> dependent;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index j = qr.rank(); j < k; ++j) dependent.push_back(names[static_cast<std::size_t>(perm(j))]);
    std::string msg = "design matrix is rank deficient; collinear columns:";
    for (const auto& d : dependent) msg += " " + d;
    throw SingularDesign(msg, dependent);
  }

  const Eigen::VectorXd beta = qr.solve(y).cwiseQuotient(scale);
  const Eigen::VectorXd fitted = X * beta;
  const Eigen::VectorXd resid = y - fitted;
  const double rss = resid.squaredNorm();
  const double tss = y.squaredNorm();
  const double dof = static_cast<double>(n - k);

  RegressionFit fit;
  fit.n_observations = static_cast<std::size_t>(n);
  fit.n_regressors = static_cast<std::size_t>(k);
  fit.covariance = covariance;
  fit.exact = rss <= 1e-24 * tss;
  fit.sigma2 = fit.exact ? 0.0 : rss / dof;
  fit.r2 = fit.exact ? 1.0 : (tss > 0.0 ? 1.0 - rss / tss : 0.0);
  fit.adjusted_r2 = 1.0 - (1.0 - fit.r2) * static_cast<double>(n) / dof;
  fit.observed.assign(y.data(), y.data() + n);
  fit.fitted.assign(fitted.data(), fitted.data() + n);
  fit.residuals.assign(resid.data(), resid.data() + n);

  // (Xs' Xs)^-1 = P R^-1 R^-T P'
  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rinv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const auto P = qr.colsPermutation();
  const Eigen::MatrixXd xtx_inv_s = P * (Rinv * Rinv.transpose()) * P.transpose();
  const Eigen::MatrixXd xtx_inv = scale.cwiseInverse().asDiagonal() * xtx_inv_s * scale.cwiseInverse().asDiagonal();

  Eigen::MatrixXd cov;
  if (fit.exact) {
    cov = Eigen::MatrixXd::Zero(k, k);
  } else if (covariance == Covariance::HC1) {
    const Eigen::MatrixXd meat = X.transpose() * resid.array().square().matrix().asDiagonal() * X;
    cov = (static_cast<double>(n) / dof) * xtx_inv * meat * xtx_inv;
  } else {
    cov = fit.sigma2 * xtx_inv;
  }

  boost::math::students_t dist(dof);
  for (Eigen::Index j = 0; j < k; ++j) {
    Coefficient c;
    c.name = names[static_cast<std::size_t>(j)];
    c.estimate = beta(j);
    c.std_error = std::sqrt(std::max(0.0, cov(j, j)));
    if (c.std_error > 0.0) {
      c.t_stat = c.estimate / c.std_error;
      c.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(c.t_stat)));
    } else if (c.estimate != 0.0) {
      c.t_stat = std::copysign(std::numeric_limits<double>::infinity(), c.estimate);
      c.p_value = 0.0;
    } else {
      c.t_stat = std::numeric_limits<double>::quiet_NaN();
      c.p_value = std::numeric_limits<double>::quiet_NaN();
    }
    fit.coefficients.push_back(std::move(c));
  }
  return fit;
}

RegressionFit fit_no_intercept(std::span<const CountryObservation> observations, std::span<const Regressor> regressors,
                               Covariance covariance) {
  const auto n = static_cast<Eigen::Index>(observations.size());
  const auto k = static_cast<Eigen::Index>(regressors.size());
  Eigen::MatrixXd X(n, k);
  Eigen::VectorXd y(n);
  std::vector<std::string> names;
  for (auto r : regressors) names.emplace_back(display_label(r));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& obs = observations[static_cast<std::size_t>(i)];
    y(i) = obs.eaf_capacity;
    for (Eigen::Index j = 0; j < k; ++j) {
      auto v = obs.value(regressors[static_cast<std::size_t>(j)]);
      if (!v) {
        throw std::invalid_argument("observation " + obs.country + " lacks regressor " +
                                    std::string(column_name(regressors[static_cast<std::size_t>(j)])));
      }
      X(i, j) = *v;
    }
  }
  RegressionFit fit = fit_through_origin(X, y, names, covariance);
  fit.regressors.assign(regressors.begin(), regressors.end());
  for (const auto& obs : observations) fit.countries.push_back(obs.country);
  return fit;
}

double predict(const RegressionFit& fit, std::span<const double> x) {
  if (x.size() != fit.coefficients.size()) throw std::invalid_argument("predict: regressor count mismatch");
  double y = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) y += fit.coefficients[j].estimate * x[j];
  return y;
}

double predict(const RegressionFit& fit, const CountryObservation& observation) {
  if (fit.regressors.size() != fit.coefficients.size()) {
    throw std::invalid_argument("predict: fit was not built from named regressors");
  }
  std::vector<double> x;
  for (auto r : fit.regressors) {
    auto v = observation.value(r);
    if (!v) throw std::invalid_argument("predict: observation lacks regressor " + std::string(column_name(r)));
    x.push_back(*v);
  }
  return predict(fit, x);
}

}  // namespace scrapnet
