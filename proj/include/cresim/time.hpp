#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cresim {

// Simulated time as integer microseconds. All durations in the system are
// exact integer counts; there is no floating-point time anywhere.
struct SimTime {
    std::int64_t micros = 0;

    constexpr SimTime() = default;
    constexpr explicit SimTime(std::int64_t us) : micros(us) {}

    static constexpr SimTime zero() { return SimTime{0}; }
    static constexpr SimTime from_millis(std::int64_t ms) { return SimTime{ms * 1000}; }
    static constexpr SimTime from_seconds(std::int64_t s) { return SimTime{s * 1000000}; }

    constexpr auto operator<=>(const SimTime&) const = default;

    constexpr SimTime operator+(SimTime o) const { return SimTime{micros + o.micros}; }
    constexpr SimTime operator-(SimTime o) const { return SimTime{micros - o.micros}; }
    constexpr SimTime operator*(std::int64_t k) const { return SimTime{micros * k}; }
    SimTime& operator+=(SimTime o) { micros += o.micros; return *this; }
};

// A duration is the same representation as an instant; the distinction is
// purely by convention at use sites.
using Duration = SimTime;

struct DurationParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parses a human-readable duration string with a unit suffix ("10s",
// "800ms", "250us", "1.5s"). Decimal fractions are accepted as long as the
// value is an exact number of microseconds.
Duration parse_duration(const std::string& text);

// Formats as the largest unit that divides evenly ("10s", "800ms", "1500ms").
std::string format_duration(Duration d);

}  // namespace cresim
