#include "scrapnet/country_codes.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "scrapnet/csv.hpp"

namespace scrapnet {

namespace {

struct CountryEntry {
  int numeric;
  const char* alpha3;
  const char* name;
};

constexpr CountryEntry kCountries[] = {
#include "country_table.inc"
};

}  // namespace

std::optional<std::string> to_alpha3(std::string_view code) {
  code = trim(code);
  if (code.empty()) return std::nullopt;
  if (std::all_of(code.begin(), code.end(), [](unsigned char c) { return std::isdigit(c); })) {
    int numeric = 0;
    auto res = std::from_chars(code.data(), code.data() + code.size(), numeric);
    if (res.ec != std::errc()) return std::nullopt;
    for (const auto& e : kCountries) {
      if (e.numeric == numeric) return std::string(e.alpha3);
    }
    return std::nullopt;
  }
  if (code.size() == 3) {
    std::string upper(code);
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    for (const auto& e : kCountries) {
      if (upper == e.alpha3) return upper;
    }
  }
  return std::nullopt;
}

std::string country_name(std::string_view alpha3) {
  for (const auto& e : kCountries) {
    if (alpha3 == e.alpha3) return e.name;
  }
  return std::string(alpha3);
}

}  // namespace scrapnet
