#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "netlens/dates.hpp"
#include "netlens/sentiment.hpp"
#include "netlens/speedtest.hpp"

namespace netlens::trends {

/// Sort-based; even counts average the two middle values.
double median(std::vector<double> values);

struct DatedReport {
    speedtest::SpeedTestReport report;
    std::int64_t fallback_timestamp = 0;  // originating post, used when the
                                          // screenshot itself carries no date
};

struct MonthlyPoint {
    Month month;
    std::optional<double> median_download;  // Mbps
    std::size_t sample_count = 0;
    std::map<double, double> subsample_medians;  // fraction -> Mbps
    std::optional<double> pos;
    std::optional<std::size_t> strong_pos;
    std::optional<std::size_t> strong_neg;
    std::optional<std::int64_t> launches;
    std::optional<std::int64_t> reported_users;
};

/// One point per calendar month over [start, end]; months without reports
/// stay empty rather than carrying fabricated zeros.
std::vector<MonthlyPoint> monthly_median_series(const std::vector<DatedReport>& reports,
                                                Month start, Month end);

/// Medians of seeded uniform subsamples (without replacement, ceil(f*n)
/// values). Same seed, same result.
std::map<double, double> subsample_medians(const std::vector<double>& month_values,
                                           const std::vector<double>& fractions,
                                           std::uint64_t seed);

struct AnnotationTable {
    std::map<Month, std::int64_t> launches;
    std::vector<std::pair<Date, std::int64_t>> reported_users;  // date ascending
};

/// CSV month,count. Throws error(duplicate_month) on a repeated month.
AnnotationTable load_launches(const std::string& csv_text, AnnotationTable table = {});
/// CSV date,count.
AnnotationTable load_users(const std::string& csv_text, AnnotationTable table);

/// Launches join by month; user counts join as the latest figure reported at
/// or before the month's end. Never touches medians or counts.
std::vector<MonthlyPoint> join_annotations(std::vector<MonthlyPoint> series,
                                           const AnnotationTable& tables);

/// month,median_mbps,median_p95,median_p90,pos,launches,users with blank
/// cells for missing values.
std::string trend_csv(const std::vector<MonthlyPoint>& series,
                      const std::vector<double>& fractions);

/// Minimal line chart of the median series with the Pos overlay.
std::string trend_svg(const std::vector<MonthlyPoint>& series);

}  // namespace netlens::trends
