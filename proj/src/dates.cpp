#include "netlens/dates.hpp"

#include <cstdio>

#include "netlens/errors.hpp"

namespace netlens {

namespace {

using days_t = std::chrono::sys_days;

days_t to_sys(Date d) { return days_t{std::chrono::days{d.days}}; }

std::chrono::year_month_day ymd_of(Date d) { return std::chrono::year_month_day{to_sys(d)}; }

}  // namespace

Date date_from_ymd(int year, int month, int day) {
    std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{unsigned(month)},
                                    std::chrono::day{unsigned(day)}};
    if (!ymd.ok()) throw error(errc::config_error, "invalid calendar date");
    return Date{static_cast<std::int32_t>(days_t{ymd}.time_since_epoch().count())};
}

Date date_from_epoch_seconds(std::int64_t seconds) {
    // Floor division so pre-epoch timestamps land on the right day.
    std::int64_t d = seconds / 86400;
    if (seconds % 86400 < 0) --d;
    return Date{static_cast<std::int32_t>(d)};
}

Month month_of(Date d) {
    auto ymd = ymd_of(d);
    return Month{(int(ymd.year()) - 1970) * 12 + int(unsigned(ymd.month())) - 1};
}

Month month_from_ym(int year, int month) { return Month{(year - 1970) * 12 + month - 1}; }

Date week_monday(Date d) {
    std::chrono::weekday wd{to_sys(d)};
    int back = int(wd.iso_encoding()) - 1;  // Monday == 1
    return Date{d.days - back};
}

Date first_day(Month m) {
    int year = 1970 + m.months / 12;
    int mon = m.months % 12;
    if (mon < 0) {
        mon += 12;
        --year;
    }
    return date_from_ymd(year, mon + 1, 1);
}

Date last_day(Month m) { return Date{first_day(Month{m.months + 1}).days - 1}; }

std::string to_iso_date(Date d) {
    auto ymd = ymd_of(d);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                  unsigned(ymd.day()));
    return buf;
}

std::string to_iso_month(Month m) {
    int year = 1970 + m.months / 12;
    int mon = m.months % 12;
    if (mon < 0) {
        mon += 12;
        --year;
    }
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", year, mon + 1);
    return buf;
}

std::string to_iso_datetime(std::int64_t epoch_seconds) {
    Date d = date_from_epoch_seconds(epoch_seconds);
    std::int64_t rem = epoch_seconds - std::int64_t{d.days} * 86400;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "T%02d:%02d:%02dZ", int(rem / 3600), int(rem / 60 % 60),
                  int(rem % 60));
    return to_iso_date(d) + buf;
}

Date parse_iso_date(const std::string& s) {
    int y = 0, m = 0, d = 0;
    char extra = 0;
    if (std::sscanf(s.c_str(), "%4d-%2d-%2d%c", &y, &m, &d, &extra) != 3)
        throw error(errc::config_error, "expected YYYY-MM-DD, got '" + s + "'");
    return date_from_ymd(y, m, d);
}

Month parse_iso_month(const std::string& s) {
    int y = 0, m = 0;
    char extra = 0;
    if (std::sscanf(s.c_str(), "%4d-%2d%c", &y, &m, &extra) != 2 || m < 1 || m > 12)
        throw error(errc::config_error, "expected YYYY-MM, got '" + s + "'");
    return month_from_ym(y, m);
}

}  // namespace netlens
