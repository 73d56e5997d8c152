#include "courtaudit/date.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace courtaudit {

namespace {

// Howard Hinnant's civil-from-days / days-from-civil algorithms.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
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

int days_in_month(int y, int m) {
    static constexpr std::array<int, 12> lengths = {31, 28, 31, 30, 31, 30,
                                                    31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap_year(y)) return 29;
    return lengths[static_cast<std::size_t>(m - 1)];
}

int parse_int(const std::string& text, std::size_t begin, std::size_t len) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data() + begin, text.data() + begin + len, value);
    if (ec != std::errc() || ptr != text.data() + begin + len)
        throw std::invalid_argument("bad date field in '" + text + "'");
    return value;
}

}  // namespace

Date Date::from_ymd(int year, int month, int day) {
    if (month < 1 || month > 12)
        throw std::invalid_argument("month out of range: " + std::to_string(month));
    if (day < 1 || day > days_in_month(year, month))
        throw std::invalid_argument("day out of range: " + std::to_string(day));
    return Date(days_from_civil(year, month, day));
}

Date Date::parse_iso(const std::string& text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-')
        throw std::invalid_argument("expected YYYY-MM-DD, got '" + text + "'");
    const int y = parse_int(text, 0, 4);
    const int m = parse_int(text, 5, 2);
    const int d = parse_int(text, 8, 2);
    return from_ymd(y, m, d);
}

void Date::to_civil(int& y, int& m, int& d) const {
    civil_from_days(serial_, y, m, d);
}

int Date::year() const {
    int y, m, d;
    to_civil(y, m, d);
    return y;
}

int Date::month() const {
    int y, m, d;
    to_civil(y, m, d);
    return m;
}

int Date::day() const {
    int y, m, d;
    to_civil(y, m, d);
    return d;
}

double Date::year_fraction() const {
    int y, m, d;
    to_civil(y, m, d);
    const std::int64_t start = days_from_civil(y, 1, 1);
    const double length = is_leap_year(y) ? 366.0 : 365.0;
    return y + static_cast<double>(serial_ - start) / length;
}

std::string Date::to_iso() const {
    int y, m, d;
    to_civil(y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return buf;
}

}  // namespace courtaudit
