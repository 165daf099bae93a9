#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace offering::text {

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

/// Whole-string parses; std::nullopt on trailing garbage or overflow.
std::optional<double> parse_double(std::string_view s);
std::optional<int> parse_int(std::string_view s);

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double x);

/// Fixed-point text with `digits` decimals, no exponent.
std::string format_fixed(double x, int digits);

}  // namespace offering::text
