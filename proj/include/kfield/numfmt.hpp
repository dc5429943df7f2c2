#pragma once

#include <string>
#include <string_view>

namespace kfield {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// Strict parse of a whole token; returns false on trailing garbage.
bool parse_double(std::string_view text, double& out);
bool parse_long(std::string_view text, long& out);

std::string_view trim(std::string_view s);

}  // namespace kfield
