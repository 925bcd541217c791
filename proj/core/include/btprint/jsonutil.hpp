#pragma once

#include <string>
#include <string_view>

namespace btprint {

/// Shortest decimal string that parses back to exactly the same double.
std::string double_to_string(double v);

/// Inverse of double_to_string. Throws Error on malformed input.
double double_from_string(std::string_view s);

}  // namespace btprint
