#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace scrapnet {

/// Maps a numeric (ISO 3166-1 or trade-statistics variant) or alpha-3 code
/// to alpha-3. Leading zeros in numeric codes are ignored. Returns nullopt
/// when the code is not in the bundled table.
std::optional<std::string> to_alpha3(std::string_view code);

/// English short name for an alpha-3 code, or the code itself if unknown.
std::string country_name(std::string_view alpha3);

}  // namespace scrapnet
