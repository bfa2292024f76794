#include "vsense/format.hpp"

#include "vsense/error.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace vsense {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view token) {
    token = trim(token);
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
        throw Error(Errc::ParseError, "not a number: '" + std::string(token) + "'");
    }
    return v;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

}  // namespace vsense
