#pragma once

#include <cstdint>
#include <string>

namespace pigflow {

/// Integer microseconds since 1970-01-01T00:00:00 UTC. All series are
/// timezone-free; wall-clock input is converted once at the boundary.
using Timestamp = std::int64_t;

inline constexpr Timestamp kMicrosPerSecond = 1'000'000;

constexpr Timestamp seconds_to_us(double s) {
    return static_cast<Timestamp>(s * 1e6 + (s >= 0 ? 0.5 : -0.5));
}

constexpr double us_to_seconds(Timestamp t) {
    return static_cast<double>(t) / 1e6;
}

/// Floor division; bins straddling negative timestamps stay aligned.
constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

/// Builds a UTC timestamp from calendar fields (proleptic Gregorian).
Timestamp make_timestamp(int year, int month, int day,
                         int hour = 0, int minute = 0, int second = 0);

/// Parses `YYYY-MM-DD` or `YYYY-MM-DDTHH:MM:SS[Z]`. Throws Error on
/// anything else; non-UTC offsets are rejected.
Timestamp parse_iso8601(const std::string& text);

/// Formats as `YYYY-MM-DDTHH:MM:SSZ` (sub-second part dropped).
std::string format_iso8601(Timestamp t);

} // namespace pigflow
