#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace apf::csv {

/// Shortest-round-trip is not enough for byte-stable files across tools, so
/// doubles are always written with 17 significant digits.
std::string format_double(double value);

std::vector<std::string_view> split_fields(std::string_view line);

/// Parses a full field as double. Throws std::runtime_error on trailing junk.
double parse_double(std::string_view field);

}  // namespace apf::csv
