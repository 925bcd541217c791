#include "btprint/jsonutil.hpp"

#include <charconv>
#include <system_error>

#include "btprint/errors.hpp"

namespace btprint {

std::string double_to_string(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw Error("double_to_string failed");
    return std::string(buf, end);
}

double double_from_string(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw Error("not a decimal number: " + std::string(s));
    return v;
}

}  // namespace btprint
