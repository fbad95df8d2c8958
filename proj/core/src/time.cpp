#include "pigflow/time.hpp"

#include <array>
#include <cstdio>

#include "pigflow/error.hpp"

namespace pigflow {

namespace {

// Days from civil date, Howard Hinnant's algorithm (public domain).
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

bool all_digits(const std::string& s, std::size_t from, std::size_t count) {
    if (from + count > s.size()) return false;
    for (std::size_t i = from; i < from + count; ++i)
        if (s[i] < '0' || s[i] > '9') return false;
    return true;
}

int to_int(const std::string& s, std::size_t from, std::size_t count) {
    int v = 0;
    for (std::size_t i = from; i < from + count; ++i) v = v * 10 + (s[i] - '0');
    return v;
}

} // namespace

Timestamp make_timestamp(int year, int month, int day, int hour, int minute,
                         int second) {
    const std::int64_t days = days_from_civil(year, month, day);
    const std::int64_t secs =
        days * 86400 + hour * 3600LL + minute * 60LL + second;
    return secs * kMicrosPerSecond;
}

Timestamp parse_iso8601(const std::string& text) {
    // YYYY-MM-DD
    if (!all_digits(text, 0, 4) || text.size() < 10 || text[4] != '-' ||
        !all_digits(text, 5, 2) || text[7] != '-' || !all_digits(text, 8, 2))
        throw Error("invalid ISO-8601 timestamp: '" + text + "'");
    const int y = to_int(text, 0, 4);
    const int mo = to_int(text, 5, 2);
    const int d = to_int(text, 8, 2);
    if (mo < 1 || mo > 12 || d < 1 || d > 31)
        throw Error("invalid ISO-8601 date: '" + text + "'");
    if (text.size() == 10) return make_timestamp(y, mo, d);

    if (text[10] != 'T' || !all_digits(text, 11, 2) || text[13] != ':' ||
        !all_digits(text, 14, 2) || text[16] != ':' || !all_digits(text, 17, 2))
        throw Error("invalid ISO-8601 timestamp: '" + text + "'");
    const int h = to_int(text, 11, 2);
    const int mi = to_int(text, 14, 2);
    const int s = to_int(text, 17, 2);
    if (h > 23 || mi > 59 || s > 60)
        throw Error("invalid ISO-8601 time: '" + text + "'");
    std::size_t rest = 19;
    if (rest < text.size()) {
        if (text.substr(rest) != "Z")
            throw Error("timestamps must be UTC ('Z'): '" + text + "'");
    }
    return make_timestamp(y, mo, d, h, mi, s);
}

std::string format_iso8601(Timestamp t) {
    std::int64_t secs = floor_div(t, kMicrosPerSecond);
    std::int64_t days = floor_div(secs, 86400);
    int sod = static_cast<int>(secs - days * 86400);
    int y, m, d;
    civil_from_days(days, y, m, d);
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%04d-%02d-%02dT%02d:%02d:%02dZ", y,
                  m, d, sod / 3600, (sod / 60) % 60, sod % 60);
    return std::string(buf.data());
}

} // namespace pigflow
