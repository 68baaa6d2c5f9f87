#pragma once

#include <charconv>
#include <string>

namespace remirl {

/// `%.17g` rendering; round-trips every finite double.
inline std::string format_double(double value) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
    return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

} // namespace remirl
