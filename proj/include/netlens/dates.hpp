#pragma once

#include <chrono>
#include <cstdint>
#include <string>

namespace netlens {

/// Calendar date, UTC. Stored as days since 1970-01-01.
struct Date {
    std::int32_t days = 0;

    auto operator<=>(const Date&) const = default;
};

/// Calendar month, UTC. Stored as months since 1970-01.
struct Month {
    std::int32_t months = 0;

    auto operator<=>(const Month&) const = default;
};

Date date_from_ymd(int year, int month, int day);
Date date_from_epoch_seconds(std::int64_t seconds);
Month month_of(Date d);
Month month_from_ym(int year, int month);

/// Monday of the ISO week containing d.
Date week_monday(Date d);

Date first_day(Month m);
Date last_day(Month m);

/// "YYYY-MM-DD"
std::string to_iso_date(Date d);
/// "YYYY-MM"
std::string to_iso_month(Month m);
/// "YYYY-MM-DDTHH:MM:SSZ"
std::string to_iso_datetime(std::int64_t epoch_seconds);

/// Parses "YYYY-MM-DD"; throws error(config_error) on malformed input.
Date parse_iso_date(const std::string& s);
/// Parses "YYYY-MM"; throws error(config_error) on malformed input.
Month parse_iso_month(const std::string& s);

inline Date add_days(Date d, int n) { return Date{d.days + n}; }
inline int days_between(Date a, Date b) { return b.days - a.days; }

}  // namespace netlens
