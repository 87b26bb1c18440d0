#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dcda::text {

// Shortest form that still carries 17 significant digits' worth of
// precision; parsing it back yields the same double.
std::string format_double(double v);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

}  // namespace dcda::text
