#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace courtaudit {

// Calendar date with day precision, proleptic Gregorian. Stored as a serial
// day count (days since 1970-01-01) so date arithmetic is plain integer math.
class Date {
public:
    Date() = default;
    explicit Date(std::int64_t serial_days) : serial_(serial_days) {}

    static Date from_ymd(int year, int month, int day);

    // Parses "YYYY-MM-DD". Throws std::invalid_argument on malformed input
    // or out-of-range fields.
    static Date parse_iso(const std::string& text);

    std::int64_t serial() const { return serial_; }

    int year() const;
    int month() const;
    int day() const;

    // Year plus the elapsed fraction of that year, e.g. 1980-07-02 -> ~1980.5.
    double year_fraction() const;

    std::string to_iso() const;

    Date plus_days(std::int64_t d) const { return Date(serial_ + d); }

    auto operator<=>(const Date&) const = default;

private:
    void to_civil(int& y, int& m, int& d) const;

    std::int64_t serial_ = 0;
};

inline std::int64_t days_between(Date from, Date to) {
    return to.serial() - from.serial();
}

// Project-wide convention: one year is 365.25 days.
inline double years_between(Date from, Date to) {
    return static_cast<double>(days_between(from, to)) / 365.25;
}

inline bool is_leap_year(int y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

}  // namespace courtaudit
