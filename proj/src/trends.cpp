#include "netlens/trends.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "netlens/errors.hpp"
#include "netlens/rng.hpp"
#include "netlens/util.hpp"

namespace netlens::trends {

double median(std::vector<double> values) {
    if (values.empty()) throw error(errc::empty_input, "median of empty set");
    std::size_t n = values.size();
    auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(values.begin(), mid, values.end());
    if (n % 2) return *mid;
    double upper = *mid;
    double lower = *std::max_element(values.begin(), mid);
    return (lower + upper) / 2;
}

namespace {

std::optional<speedtest::SpeedUnit> speed_unit_of(const std::string& u) {
    if (u == "mbps") return speedtest::SpeedUnit::mbps;
    if (u == "kbps") return speedtest::SpeedUnit::kbps;
    if (u == "gbps") return speedtest::SpeedUnit::gbps;
    return std::nullopt;
}

}  // namespace

std::vector<MonthlyPoint> monthly_median_series(const std::vector<DatedReport>& reports,
                                                Month start, Month end) {
    if (end < start) throw error(errc::config_error, "month range end before start");
    std::map<Month, std::vector<double>> values;
    for (const auto& dr : reports) {
        auto unit = speed_unit_of(dr.report.download.unit);
        if (!unit) continue;
        std::int64_t ts = dr.report.test_timestamp.value_or(dr.fallback_timestamp);
        Month m = month_of(date_from_epoch_seconds(ts));
        if (m < start || end < m) continue;
        values[m].push_back(speedtest::to_mbps(dr.report.download.value, *unit));
    }
    std::vector<MonthlyPoint> series;
    for (Month m = start; m <= end; m = Month{m.months + 1}) {
        MonthlyPoint point;
        point.month = m;
        if (auto it = values.find(m); it != values.end()) {
            point.sample_count = it->second.size();
            point.median_download = median(it->second);
        }
        series.push_back(std::move(point));
    }
    return series;
}

std::map<double, double> subsample_medians(const std::vector<double>& month_values,
                                           const std::vector<double>& fractions,
                                           std::uint64_t seed) {
    if (month_values.empty()) throw error(errc::empty_input, "subsample of empty month");
    std::map<double, double> out;
    for (double f : fractions) {
        if (!(f > 0.0) || f > 1.0) throw error(errc::config_error, "fraction out of (0,1]");
        auto k = static_cast<std::size_t>(
            std::ceil(f * static_cast<double>(month_values.size()) - 1e-12));
        if (k < 1) k = 1;
        // Salted per fraction so the draws are independent.
        Rng rng(seed ^ fnv1a64("subsample:" + format_double(f)));
        auto picked = sample_indices(month_values.size(), k, rng);
        std::vector<double> sample;
        sample.reserve(picked.size());
        for (auto i : picked) sample.push_back(month_values[i]);
        out[f] = median(std::move(sample));
    }
    return out;
}

AnnotationTable load_launches(const std::string& csv_text, AnnotationTable table) {
    std::istringstream in(csv_text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first && line.rfind("month", 0) == 0) {
            first = false;
            continue;
        }
        first = false;
        auto fields = split_csv_line(line);
        if (fields.size() < 2) throw error(errc::config_error, "launches row: " + line);
        Month m = parse_iso_month(fields[0]);
        if (table.launches.count(m)) throw error(errc::duplicate_month, fields[0]);
        table.launches[m] = std::strtoll(fields[1].c_str(), nullptr, 10);
    }
    return table;
}

AnnotationTable load_users(const std::string& csv_text, AnnotationTable table) {
    std::istringstream in(csv_text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first && line.rfind("date", 0) == 0) {
            first = false;
            continue;
        }
        first = false;
        auto fields = split_csv_line(line);
        if (fields.size() < 2) throw error(errc::config_error, "users row: " + line);
        table.reported_users.emplace_back(parse_iso_date(fields[0]),
                                          std::strtoll(fields[1].c_str(), nullptr, 10));
    }
    std::sort(table.reported_users.begin(), table.reported_users.end());
    return table;
}

std::vector<MonthlyPoint> join_annotations(std::vector<MonthlyPoint> series,
                                           const AnnotationTable& tables) {
    for (auto& point : series) {
        if (auto it = tables.launches.find(point.month); it != tables.launches.end())
            point.launches = it->second;
        Date month_end = last_day(point.month);
        std::optional<std::int64_t> users;
        for (const auto& [date, count] : tables.reported_users) {
            if (date <= month_end) users = count;  // ascending, last wins
            else break;
        }
        point.reported_users = users;
    }
    return series;
}

std::string trend_csv(const std::vector<MonthlyPoint>& series,
                      const std::vector<double>& fractions) {
    std::string out = "month,median_mbps";
    for (double f : fractions) {
        out += ",median_p" + std::to_string(static_cast<int>(std::lround(f * 100)));
    }
    out += ",pos,launches,users\n";
    for (const auto& point : series) {
        out += to_iso_month(point.month);
        out += ',';
        if (point.median_download) out += format_double(*point.median_download);
        for (double f : fractions) {
            out += ',';
            if (auto it = point.subsample_medians.find(f); it != point.subsample_medians.end())
                out += format_double(it->second);
        }
        out += ',';
        if (point.pos) out += format_double(*point.pos);
        out += ',';
        if (point.launches) out += std::to_string(*point.launches);
        out += ',';
        if (point.reported_users) out += std::to_string(*point.reported_users);
        out += '\n';
    }
    return out;
}

std::string trend_svg(const std::vector<MonthlyPoint>& series) {
    const double width = 960, height = 360, pad = 50;
    double max_mbps = 1.0;
    for (const auto& p : series)
        if (p.median_download) max_mbps = std::max(max_mbps, *p.median_download);

    auto x_of = [&](std::size_t i) {
        double denom = series.size() > 1 ? static_cast<double>(series.size() - 1) : 1.0;
        return pad + (width - 2 * pad) * static_cast<double>(i) / denom;
    };
    auto y_mbps = [&](double v) { return height - pad - (height - 2 * pad) * v / max_mbps; };
    auto y_pos = [&](double v) { return height - pad - (height - 2 * pad) * v; };

    auto polyline = [&](const std::string& color, auto value_of, auto y_of) {
        std::string pts;
        for (std::size_t i = 0; i < series.size(); ++i) {
            auto v = value_of(series[i]);
            if (!v) continue;
            pts += format_double(x_of(i)) + "," + format_double(y_of(*v)) + " ";
        }
        if (pts.empty()) return std::string{};
        return "  <polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\" points=\"" +
               pts + "\"/>\n";
    };

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_double(width) +
                      "\" height=\"" + format_double(height) + "\">\n";
    svg += "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "  <line x1=\"" + format_double(pad) + "\" y1=\"" + format_double(height - pad) +
           "\" x2=\"" + format_double(width - pad) + "\" y2=\"" + format_double(height - pad) +
           "\" stroke=\"black\"/>\n";
    svg += "  <line x1=\"" + format_double(pad) + "\" y1=\"" + format_double(pad) + "\" x2=\"" +
           format_double(pad) + "\" y2=\"" + format_double(height - pad) + "\" stroke=\"black\"/>\n";
    svg += polyline("steelblue", [](const MonthlyPoint& p) { return p.median_download; }, y_mbps);
    svg += polyline("seagreen", [](const MonthlyPoint& p) { return p.pos; }, y_pos);
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (i % 3 == 0 || series.size() <= 8) {
            svg += "  <text x=\"" + format_double(x_of(i)) + "\" y=\"" +
                   format_double(height - pad + 18) +
                   "\" font-size=\"10\" text-anchor=\"middle\">" + to_iso_month(series[i].month) +
                   "</text>\n";
        }
    }
    svg += "  <text x=\"" + format_double(pad) + "\" y=\"" + format_double(pad - 10) +
           "\" font-size=\"11\">median downlink (Mbps, blue) / pos share (green)</text>\n";
    svg += "</svg>\n";
    return svg;
}

}  // namespace netlens::trends
