#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace keymeter {

/// Fixed-point decimal rendering, e.g. format_fixed(46.8, 1) == "46.8".
std::string format_fixed(double value, int decimals);

/// Shortest representation that round-trips through a double.
std::string format_compact(double value);

std::string trim(std::string_view text);

/// Minimal RFC 4180 quoting: quote only when the field contains a comma,
/// quote or newline.
std::string csv_quote(const std::string& field);

/// Split one CSV line honoring double-quoted fields.
std::vector<std::string> csv_split(std::string_view line);

/// First parseable decimal number in free-form text (e.g. "temp=48.2'C").
std::optional<double> parse_first_double(std::string_view text);

std::vector<std::string> split_whitespace(std::string_view text);

} // namespace keymeter
