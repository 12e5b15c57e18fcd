#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace covpost {

/// Shortest decimal string that parses back to the same double.
std::string format_double(double x);

/// Parses a full field as a double; throws ParseError with `context` on
/// failure.
double parse_double(std::string_view field, const std::string& context);

std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace covpost
