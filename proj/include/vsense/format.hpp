#pragma once

#include <string>
#include <string_view>

namespace vsense {

// Shortest decimal that parses back to the identical double.
std::string format_double(double v);

// Strict full-token parse; throws Error(ParseError) on trailing garbage.
double parse_double(std::string_view token);

std::string_view trim(std::string_view s);

}  // namespace vsense
