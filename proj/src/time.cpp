#include "cresim/time.hpp"

#include <cctype>
#include <cstdlib>

namespace cresim {

namespace {

bool all_digits(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

}  // namespace

Duration parse_duration(const std::string& text) {
    std::size_t i = 0;
    while (i < text.size() &&
           (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '.')) {
        ++i;
    }
    std::string number = text.substr(0, i);
    std::string unit = text.substr(i);
    if (number.empty())
        throw DurationParseError("duration '" + text + "': missing number");

    std::int64_t unit_us;
    if (unit == "us") unit_us = 1;
    else if (unit == "ms") unit_us = 1000;
    else if (unit == "s") unit_us = 1000000;
    else if (unit == "min") unit_us = 60LL * 1000000;
    else throw DurationParseError("duration '" + text + "': bad unit '" + unit + "'");

    std::string whole = number;
    std::string frac;
    if (auto dot = number.find('.'); dot != std::string::npos) {
        whole = number.substr(0, dot);
        frac = number.substr(dot + 1);
        if (number.find('.', dot + 1) != std::string::npos)
            throw DurationParseError("duration '" + text + "': malformed number");
    }
    if (whole.empty()) whole = "0";
    if (!all_digits(whole) || (!frac.empty() && !all_digits(frac)))
        throw DurationParseError("duration '" + text + "': malformed number");

    std::int64_t value = std::strtoll(whole.c_str(), nullptr, 10) * unit_us;
    // Fraction must resolve to a whole number of microseconds.
    std::int64_t scale = unit_us;
    for (char c : frac) {
        if (scale % 10 != 0)
            throw DurationParseError("duration '" + text + "': below microsecond resolution");
        scale /= 10;
        value += (c - '0') * scale;
    }
    return Duration{value};
}

std::string format_duration(Duration d) {
    std::int64_t us = d.micros;
    if (us % 1000000 == 0) return std::to_string(us / 1000000) + "s";
    if (us % 1000 == 0) return std::to_string(us / 1000) + "ms";
    return std::to_string(us) + "us";
}

}  // namespace cresim
