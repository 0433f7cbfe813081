#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "doctest.h"
#include "scrapnet/csv.hpp"
#include "scrapnet/firms.hpp"
#include "scrapnet/random.hpp"

using namespace scrapnet;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

FirmRecord firm(std::string id, std::string country, std::string text, std::optional<std::string> naics = std::nullopt,
                std::optional<double> revenue = std::nullopt, std::optional<double> employees = std::nullopt) {
  FirmRecord f;
  f.id = std::move(id);
  f.country = std::move(country);
  f.naics4 = std::move(naics);
  f.revenue = revenue;
  f.employees = employees;
  f.descriptions[0] = std::move(text);
  return f;
}

std::vector<std::string> ids(const FirmPopulation& p) {
  std::vector<std::string> out;
  for (const auto& f : p.firms) out.push_back(f.id);
  return out;
}

FirmPopulation population(std::vector<FirmRecord> firms) {
  FirmPopulation p;
  p.firms = std::move(firms);
  p.match_fields.assign(p.firms.size(), "Full Overview");
  return p;
}

}  // namespace

TEST_SUITE("firms") {
  TEST_CASE("keyword matching examples") {
    std::vector<FirmRecord> fs{firm("1", "AUT", "Wholesale of SCRAP metal"),
                               firm("2", "AUT", "skyscraper construction"),
                               firm("3", "AUT", "operates a scrapyard"),
                               firm("4", "AUT", "paint scraper maker; scrapers too"),
                               firm("5", "AUT", "")};
    const auto pop = match_scrap_firms(fs, {}, "test");
    CHECK(ids(pop) == std::vector<std::string>{"1", "3"});
    CHECK(pop.provenance == "test");
    REQUIRE(pop.match_fields.size() == 2);
    CHECK(pop.match_fields[0] == "Full Overview");
  }

  TEST_CASE("match fields list every matching column") {
    FirmRecord f = firm("1", "AUT", "scrap dealer");
    f.descriptions[2] = "Scrap-metal collection";
    f.descriptions[3] = "steel";
    const auto pop = match_scrap_firms(std::vector<FirmRecord>{f});
    REQUIRE(pop.firms.size() == 1);
    CHECK(pop.match_fields[0] == "Full Overview;Main Activity");
  }

  TEST_CASE("tokenizer splits on non-letters and keeps accented words whole") {
    CHECK(letter_tokens("Scrap-metal, 2nd  HAND") == std::vector<std::string>{"scrap", "metal", "nd", "hand"});
    CHECK(letter_tokens("Schrotthändler") == std::vector<std::string>{"schrotthändler"});
    CHECK(letter_tokens("").empty());
  }

  TEST_CASE("custom rule and empty keyword") {
    std::vector<FirmRecord> fs{firm("1", "AUT", "ferrous waste"), firm("2", "AUT", "wastewater")};
    CHECK(ids(match_scrap_firms(fs, {"waste", {}})) == std::vector<std::string>{"1", "2"});
    CHECK(ids(match_scrap_firms(fs, {"waste", {"wastewater"}})) == std::vector<std::string>{"1"});
    CHECK_THROWS_AS(match_scrap_firms(fs, {"", {}}), std::invalid_argument);
  }

  TEST_CASE("matching is idempotent and order independent") {
    const char* texts[] = {"scrap", "steel", "scrapyard", "skyscraper", "metal scraps", "scraper", "recycling"};
    std::vector<FirmRecord> fs;
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
      fs.push_back(firm(std::to_string(i), "DEU", std::string(texts[rng.below(7)]) + " " + texts[rng.below(7)]));
    }
    const auto once = match_scrap_firms(fs);
    const auto twice = match_scrap_firms(once.firms);
    CHECK(ids(once) == ids(twice));

    auto shuffled = fs;
    rng.shuffle(std::span<FirmRecord>(shuffled));
    auto a = ids(once), b = ids(match_scrap_firms(shuffled));
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
  }

  TEST_CASE("naics shares") {
    auto pop = population({firm("1", "A", "x", "4239"), firm("2", "A", "x", "4239"), firm("3", "A", "x", "4235"),
                           firm("4", "A", "x", "5629")});
    auto s = naics_distribution(pop);
    CHECK(s.shares.size() == 3);
    CHECK(s.shares.at("4239") == 0.5);
    CHECK(s.shares.at("4235") == 0.25);
    CHECK(s.shares.at("5629") == 0.25);
    CHECK(s.missing == 0);

    pop = population({firm("1", "A", "x", "4239"), firm("2", "A", "x", "4239")});
    CHECK(naics_distribution(pop).shares.at("4239") == 1.0);

    pop = population({firm("1", "A", "x", "4239"), firm("2", "A", "x")});
    s = naics_distribution(pop);
    CHECK(s.shares.at("4239") == 1.0);
    CHECK(s.missing_share == 0.5);
    CHECK(s.coded == 1);

    CHECK(naics_distribution(FirmPopulation{}).shares.empty());
  }

  TEST_CASE("naics shares sum to one") {
    Rng rng(9);
    std::vector<FirmRecord> fs;
    for (int i = 0; i < 997; ++i) {
      std::optional<std::string> code;
      if (rng.below(10) != 0) code = std::to_string(4200 + rng.below(37));
      fs.push_back(firm(std::to_string(i), "A", "x", code));
    }
    const auto s = naics_distribution(population(fs));
    double total = 0.0;
    for (const auto& [k, v] : s.shares) total += v;
    CHECK(std::abs(total - 1.0) < 1e-12);
    CHECK(s.coded + s.missing == 997);
  }

  TEST_CASE("country aggregates skip missing values but count every firm") {
    auto pop = population({firm("1", "AUT", "x", std::nullopt, 1e6, 10.0), firm("2", "AUT", "x", std::nullopt, 2e6)});
    const auto agg = country_aggregates(pop);
    REQUIRE(agg.size() == 1);
    CHECK(agg[0].country == "AUT");
    CHECK(agg[0].firms == 2);
    CHECK(agg[0].employees == 10.0);
    CHECK(agg[0].revenue == 3e6);
    CHECK(agg[0].employees_reported == 1);
    CHECK(country_aggregates(FirmPopulation{}).empty());
  }

  TEST_CASE("aggregates match column sums on the fixture registry") {
    const auto reg = parse_registry_file(SCRAPNET_FIXTURES "/registry.csv");
    const auto pop = match_scrap_firms(reg.firms);
    REQUIRE(pop.firms.size() >= 100);

    // Spreadsheet-style oracle: re-read the raw table and sum columns
    // directly for the first 100 matched firms.
    const Table raw = read_table_file(SCRAPNET_FIXTURES "/registry.csv");
    std::map<std::string, std::size_t> row_of;
    for (std::size_t r = 0; r < raw.rows.size(); ++r) row_of[raw.rows[r][raw.require("id")]] = r;
    FirmPopulation first;
    first.firms.assign(pop.firms.begin(), pop.firms.begin() + 100);
    first.match_fields.assign(100, "");
    std::map<std::string, std::array<double, 3>> expect;
    for (const auto& f : first.firms) {
      const auto& row = raw.rows[row_of.at(f.id)];
      auto& e = expect[row[raw.require("country")]];
      e[0] += 1;
      e[1] += parse_number(row[raw.require("employees")]).value_or(0.0);
      e[2] += parse_number(row[raw.require("revenue_usd")]).value_or(0.0);
    }
    const auto agg = country_aggregates(first);
    REQUIRE(agg.size() == expect.size());
    for (const auto& a : agg) {
      const auto& e = expect.at(a.country);
      CHECK(static_cast<double>(a.firms) == e[0]);
      CHECK(a.employees == doctest::Approx(e[1]).epsilon(1e-12));
      CHECK(a.revenue == doctest::Approx(e[2]).epsilon(1e-12));
    }
  }

  TEST_CASE("registry parsing") {
    std::istringstream in(
        "id,country,naics4,revenue_usd,employees,Full Overview,Main Products and Services,Main Activity,Primary "
        "Business Line\n"
        "a,AUT,4239,1000,5,scrap dealer,,,\n"
        "b,DEU,,,,,,,\n"
        "c,FRA,4235,-5,1,x,,,\n"
        "d,ITA,4235,1\n");
    const auto r = parse_registry(in);
    REQUIRE(r.firms.size() == 2);
    CHECK(r.skipped == 2);
    CHECK(r.firms[0].naics4.value() == "4239");
    CHECK(r.firms[0].revenue.value() == 1000.0);
    CHECK(r.firms[0].has_description());
    CHECK_FALSE(r.firms[1].naics4.has_value());
    CHECK_FALSE(r.firms[1].revenue.has_value());
    CHECK_FALSE(r.firms[1].has_description());

    std::istringstream bad("id,country,Full Overview\n");
    CHECK_THROWS_AS(parse_registry(bad), SchemaError);
  }

  TEST_CASE("combined description joins non-empty fields") {
    FirmRecord f;
    f.descriptions = {"a", "", "b c", ""};
    CHECK(f.combined_description() == "a b c");
  }

  TEST_CASE("pearson examples") {
    const std::vector<double> x{1, 2, 3}, y1{3, 5, 7}, y2{6, 4, 2};
    CHECK(pearson(x, y1).r == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(pearson(x, y1).p_value == 0.0);
    CHECK(pearson(x, y2).r == doctest::Approx(-1.0).epsilon(1e-15));
    // 24 / sqrt(42 * 24) from the centered sums.
    const std::vector<double> a{1, 2, 4}, b{1, 3, 3};
    const auto c = pearson(a, b);
    CHECK(c.r == doctest::Approx(24.0 / std::sqrt(1008.0)).epsilon(1e-14));
    CHECK(c.r == doctest::Approx(0.7559).epsilon(1e-4));
    // t = r sqrt(1/(1-r^2)) with one degree of freedom: p = 1 - 2 atan(t)/pi.
    const double t = c.r / std::sqrt(1.0 - c.r * c.r);
    CHECK(c.p_value == doctest::Approx(1.0 - 2.0 * std::atan(t) / M_PI).epsilon(1e-12));
    CHECK(c.n == 3);
  }

  TEST_CASE("pearson drops incomplete pairs and rejects degenerate input") {
    const std::vector<double> x{1, kNaN, 2, 4, 9}, y{1, 5, 3, 3, kNaN};
    const auto c = pearson(x, y);
    CHECK(c.n == 3);
    CHECK(c.r == doctest::Approx(0.7559289460).epsilon(1e-9));
    const std::vector<double> two{1, 2}, flat{5, 5, 5}, other{1, 2, 3}, shorter{1, 2, 3, 4};
    CHECK_THROWS_AS(pearson(two, two), std::invalid_argument);
    CHECK_THROWS_AS(pearson(flat, other), UndefinedCorrelation);
    CHECK_THROWS_AS(pearson(other, shorter), std::invalid_argument);
  }

  TEST_CASE("pearson symmetry and affine invariance") {
    Rng rng(21);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> x(30), y(30);
      for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = rng.normal();
        y[i] = 0.4 * x[i] + rng.normal();
      }
      const double r = pearson(x, y).r;
      CHECK(pearson(y, x).r == doctest::Approx(r).epsilon(1e-12));
      auto xs = x, ys = y;
      for (auto& v : xs) v = 3.5 * v - 7.0;
      for (auto& v : ys) v = 0.01 * v + 100.0;
      CHECK(pearson(xs, ys).r == doctest::Approx(r).epsilon(1e-9));
      CHECK(pearson(xs, ys).p_value == doctest::Approx(pearson(x, y).p_value).epsilon(1e-7));
      CHECK(r >= -1.0);
      CHECK(r <= 1.0);
    }
  }

  TEST_CASE("revenue and employee columns mark missing values") {
    auto pop = population({firm("1", "A", "x", std::nullopt, 5.0), firm("2", "A", "x", std::nullopt, std::nullopt, 3.0)});
    const auto rev = revenue_column(pop), emp = employee_column(pop);
    CHECK(rev[0] == 5.0);
    CHECK(std::isnan(rev[1]));
    CHECK(std::isnan(emp[0]));
    CHECK(emp[1] == 3.0);
  }
}
