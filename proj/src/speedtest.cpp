#include "netlens/speedtest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>

#include <json.hpp>

#include "netlens/dates.hpp"
#include "netlens/errors.hpp"
#include "netlens/util.hpp"

namespace netlens::speedtest {

namespace {

using nlohmann::json;

/// Lowercase, edge punctuation stripped: "DOWNLOAD:" -> "download".
std::string normalize(const std::string& text) {
    std::size_t begin = 0, end = text.size();
    while (begin < end && !std::isalnum(static_cast<unsigned char>(text[begin]))) ++begin;
    while (end > begin && !std::isalnum(static_cast<unsigned char>(text[end - 1]))) --end;
    return to_lower(std::string_view(text).substr(begin, end - begin));
}

bool is_speed_unit(const std::string& u) { return u == "mbps" || u == "kbps" || u == "gbps"; }
bool is_time_unit(const std::string& u) { return u == "ms" || u == "s"; }
bool is_percent_unit(const std::string& u) { return u == "%"; }

bool unit_fits(Metric m, const std::string& u) {
    switch (m) {
        case Metric::download:
        case Metric::upload: return is_speed_unit(u);
        case Metric::latency:
        case Metric::jitter: return is_time_unit(u);
        case Metric::packet_loss: return is_percent_unit(u);
    }
    return false;
}

std::string default_unit(Metric m) {
    switch (m) {
        case Metric::download:
        case Metric::upload: return "mbps";
        case Metric::latency:
        case Metric::jitter: return "ms";
        case Metric::packet_loss: return "%";
    }
    return "";
}

std::optional<std::pair<double, std::string>> try_parse(const std::string& text) {
    try {
        return parse_value_unit(text);
    } catch (const error&) {
        return std::nullopt;
    }
}

/// Numeric cell usable for metric m (bare number or fitting attached unit).
bool numeric_for(const OcrToken& tok, Metric m) {
    auto parsed = try_parse(tok.text);
    if (!parsed) return false;
    return parsed->second.empty() || unit_fits(m, parsed->second);
}

bool is_numeric(const OcrToken& tok) { return try_parse(tok.text).has_value(); }

double median_height(const std::vector<OcrToken>& tokens) {
    std::vector<double> heights;
    heights.reserve(tokens.size());
    for (const auto& t : tokens) heights.push_back(t.h);
    std::sort(heights.begin(), heights.end());
    std::size_t n = heights.size();
    return n % 2 ? heights[n / 2] : (heights[n / 2 - 1] + heights[n / 2]) / 2;
}

struct LabelBox {
    Metric metric;
    double x, y, right, bottom;
    std::size_t row;
};

/// Single tokens and adjacent in-row pairs are both checked against the
/// synonym sets ("packet loss" spans two tokens).
std::vector<LabelBox> find_labels(const std::vector<std::vector<OcrToken>>& rows,
                                  const LabelSpec& spec) {
    std::vector<LabelBox> labels;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::string one = normalize(row[i].text);
            std::optional<std::string> two;
            if (i + 1 < row.size()) two = one + ' ' + normalize(row[i + 1].text);
            for (const auto& [metric, names] : spec.synonyms) {
                if (two && names.count(*two)) {
                    labels.push_back({metric, row[i].x, std::min(row[i].y, row[i + 1].y),
                                      row[i + 1].right(),
                                      std::max(row[i].bottom(), row[i + 1].bottom()), r});
                } else if (names.count(one)) {
                    labels.push_back({metric, row[i].x, row[i].y, row[i].right(), row[i].bottom(), r});
                }
            }
        }
    }
    return labels;
}

std::optional<std::int64_t> parse_timestamp_token(const std::string& date_text,
                                                  const std::string* time_text) {
    int y, mo, d;
    char extra = 0;
    if (std::sscanf(date_text.c_str(), "%4d-%2d-%2d%c", &y, &mo, &d, &extra) != 3) return std::nullopt;
    if (mo < 1 || mo > 12 || d < 1 || d > 31) return std::nullopt;
    Date date;
    try {
        date = date_from_ymd(y, mo, d);
    } catch (const error&) {
        return std::nullopt;
    }
    std::int64_t seconds = std::int64_t{date.days} * 86400;
    if (time_text) {
        int hh = 0, mm = 0, ss = 0;
        int read = std::sscanf(time_text->c_str(), "%2d:%2d:%2d", &hh, &mm, &ss);
        if (read >= 2 && hh >= 0 && hh < 24 && mm >= 0 && mm < 60 && ss >= 0 && ss < 60)
            seconds += hh * 3600 + mm * 60 + ss;
    }
    return seconds;
}

std::optional<std::int64_t> find_timestamp(const std::vector<std::vector<OcrToken>>& rows) {
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            const std::string* time_text = i + 1 < row.size() ? &row[i + 1].text : nullptr;
            if (auto ts = parse_timestamp_token(row[i].text, time_text)) return ts;
        }
    }
    return std::nullopt;
}

std::optional<std::string> find_provider(const std::vector<std::vector<OcrToken>>& rows,
                                         const LabelSpec& spec) {
    for (const auto& row : rows)
        for (const auto& tok : row)
            if (spec.provider_names.count(normalize(tok.text))) return tok.text;
    return std::nullopt;
}

std::optional<std::string> find_server(const std::vector<std::vector<OcrToken>>& rows) {
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::string norm = normalize(row[i].text);
            if (norm != "server" && norm != "host") continue;
            std::string loc;
            for (std::size_t j = i + 1; j < row.size(); ++j) {
                if (is_numeric(row[j])) continue;
                if (!loc.empty()) loc += ' ';
                loc += row[j].text;
            }
            if (!loc.empty()) return loc;
        }
    }
    return std::nullopt;
}

/// Nearest class-valid unit token within unit_attach_factor x value height.
std::optional<std::string> attach_unit(const OcrToken& value, Metric metric,
                                       const std::vector<OcrToken>& tokens,
                                       const LabelSpec& spec) {
    double best = 0.0;
    std::optional<std::string> unit;
    for (const auto& tok : tokens) {
        std::string norm = normalize(tok.text);
        if (norm.empty() && tok.text.find('%') != std::string::npos) norm = "%";
        if (!unit_fits(metric, norm)) continue;
        double dx = tok.cx() - value.cx();
        double dy = tok.cy() - value.cy();
        double dist = std::sqrt(dx * dx + dy * dy);
        if (dist > spec.unit_attach_factor * value.h) continue;
        if (!unit || dist < best) {
            best = dist;
            unit = norm;
        }
    }
    return unit;
}

Measurement make_measurement(const OcrToken& value_token, Metric metric,
                             const std::vector<OcrToken>& tokens, const LabelSpec& spec) {
    auto [value, attached] = parse_value_unit(value_token.text);
    Measurement m;
    m.value = value;
    if (!attached.empty()) {
        m.unit = attached;
    } else if (auto near = attach_unit(value_token, metric, tokens, spec)) {
        m.unit = *near;
    } else {
        m.unit = default_unit(metric);
        m.unit_defaulted = true;
    }
    return m;
}

constexpr Metric kMetricOrder[] = {Metric::download, Metric::upload, Metric::latency,
                                   Metric::jitter, Metric::packet_loss};

}  // namespace

const char* metric_name(Metric m) {
    switch (m) {
        case Metric::download: return "download";
        case Metric::upload: return "upload";
        case Metric::latency: return "latency";
        case Metric::jitter: return "jitter";
        case Metric::packet_loss: return "packet_loss";
    }
    return "?";
}

double to_mbps(double value, SpeedUnit unit) {
    switch (unit) {
        case SpeedUnit::mbps: return value;
        case SpeedUnit::kbps: return value / 1000.0;
        case SpeedUnit::gbps: return value * 1000.0;
    }
    return value;
}

double to_ms(double value, TimeUnit unit) {
    return unit == TimeUnit::s ? value * 1000.0 : value;
}

LabelSpec default_label_spec() {
    LabelSpec spec;
    spec.synonyms[Metric::download] = {"download", "down", "dl", "downlink"};
    spec.synonyms[Metric::upload] = {"upload", "ul", "uplink"};
    spec.synonyms[Metric::latency] = {"ping", "latency", "idle latency"};
    spec.synonyms[Metric::jitter] = {"jitter"};
    spec.synonyms[Metric::packet_loss] = {"loss", "packet loss"};
    spec.provider_names = {"ookla", "speedtest", "fast", "starlink", "fiberco", "mlab"};
    return spec;
}

OcrLoadResult load_ocr_document(const std::string& json_text) try {
    json doc = json::parse(json_text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw error(errc::malformed_response, "OCR document is not a JSON object");
    OcrLoadResult result;
    result.doc.source_id = doc.value("source_id", std::string{});
    result.doc.width = doc.value("width", 0.0);
    result.doc.height = doc.value("height", 0.0);
    if (result.doc.source_id.empty() || result.doc.width <= 0 || result.doc.height <= 0)
        throw error(errc::malformed_response, "OCR document missing source_id or dimensions");
    if (!doc.contains("tokens") || !doc["tokens"].is_array())
        throw error(errc::malformed_response, "OCR document missing tokens");
    for (const auto& t : doc["tokens"]) {
        OcrToken tok;
        tok.text = t.value("text", std::string{});
        tok.x = t.value("x", 0.0);
        tok.y = t.value("y", 0.0);
        tok.w = t.value("w", 0.0);
        tok.h = t.value("h", 0.0);
        tok.confidence = std::clamp(t.value("confidence", 1.0), 0.0, 1.0);
        if (tok.text.empty() || tok.w <= 0 || tok.h <= 0) {
            result.warnings.push_back("dropped degenerate token '" + tok.text + "'");
            continue;
        }
        double x0 = std::clamp(tok.x, 0.0, result.doc.width);
        double y0 = std::clamp(tok.y, 0.0, result.doc.height);
        double x1 = std::clamp(tok.x + tok.w, 0.0, result.doc.width);
        double y1 = std::clamp(tok.y + tok.h, 0.0, result.doc.height);
        if (x0 != tok.x || y0 != tok.y || x1 != tok.x + tok.w || y1 != tok.y + tok.h)
            result.warnings.push_back("clamped bbox of '" + tok.text + "'");
        if (x1 - x0 <= 0 || y1 - y0 <= 0) {
            result.warnings.push_back("dropped out-of-bounds token '" + tok.text + "'");
            continue;
        }
        tok.x = x0;
        tok.y = y0;
        tok.w = x1 - x0;
        tok.h = y1 - y0;
        result.doc.tokens.push_back(std::move(tok));
    }
    return result;
} catch (const json::exception& e) {
    throw error(errc::malformed_response, e.what());
}

std::string ocr_document_json(const OcrDocument& doc) {
    json j;
    j["source_id"] = doc.source_id;
    j["width"] = doc.width;
    j["height"] = doc.height;
    json tokens = json::array();
    for (const auto& t : doc.tokens) {
        tokens.push_back({{"text", t.text},
                          {"x", t.x},
                          {"y", t.y},
                          {"w", t.w},
                          {"h", t.h},
                          {"confidence", t.confidence}});
    }
    j["tokens"] = std::move(tokens);
    return j.dump(2) + "\n";
}

std::vector<std::vector<OcrToken>> cluster_rows(const std::vector<OcrToken>& tokens,
                                                double row_tolerance) {
    if (tokens.empty()) return {};
    double tol = row_tolerance * median_height(tokens);
    std::vector<OcrToken> sorted = tokens;
    std::sort(sorted.begin(), sorted.end(), [](const OcrToken& a, const OcrToken& b) {
        if (a.cy() != b.cy()) return a.cy() < b.cy();
        if (a.cx() != b.cx()) return a.cx() < b.cx();
        return a.text < b.text;
    });
    std::vector<std::vector<OcrToken>> rows;
    double anchor = 0.0;
    for (const auto& tok : sorted) {
        if (rows.empty() || tok.cy() - anchor > tol) {
            rows.emplace_back();
            anchor = tok.cy();
        }
        rows.back().push_back(tok);
    }
    for (auto& row : rows) {
        std::sort(row.begin(), row.end(), [](const OcrToken& a, const OcrToken& b) {
            if (a.x != b.x) return a.x < b.x;
            return a.text < b.text;
        });
    }
    return rows;
}

Template classify_template(const OcrDocument& doc, const LabelSpec& spec) {
    if (doc.tokens.empty()) throw error(errc::no_tokens, doc.source_id);
    auto rows = cluster_rows(doc.tokens, spec.row_tolerance);

    std::size_t multi_numeric_rows = 0;
    for (const auto& row : rows) {
        std::size_t numerics = 0;
        for (const auto& tok : row)
            if (is_numeric(tok)) ++numerics;
        if (numerics >= 2) ++multi_numeric_rows;
    }
    std::size_t download_labels = 0;
    for (const auto& tok : doc.tokens)
        if (spec.synonyms.at(Metric::download).count(normalize(tok.text))) ++download_labels;

    // A sub-report per row repeats several numeric cells; a single-report
    // layout never stacks two such rows.
    return (multi_numeric_rows >= 2 && download_labels <= 1) ? Template::table : Template::simple;
}

std::pair<double, std::string> parse_value_unit(const std::string& text) {
    std::string s = text;
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    if (s.empty()) throw error(errc::not_a_number, "empty token");

    // Trailing letters / '%' / '/' form the attached unit.
    std::size_t unit_begin = s.size();
    while (unit_begin > 0) {
        unsigned char c = static_cast<unsigned char>(s[unit_begin - 1]);
        if (std::isalpha(c) || c == '%' || c == '/') --unit_begin;
        else break;
    }
    std::string unit = to_lower(std::string_view(s).substr(unit_begin));
    std::string num = s.substr(0, unit_begin);
    if (num.empty()) throw error(errc::not_a_number, "'" + text + "'");

    std::size_t start = (num[0] == '+' || num[0] == '-') ? 1 : 0;
    std::string digits = num.substr(start);
    if (digits.empty()) throw error(errc::not_a_number, "'" + text + "'");

    bool has_period = digits.find('.') != std::string::npos;
    std::string cleaned;
    cleaned.reserve(digits.size());
    for (std::size_t i = 0; i < digits.size(); ++i) {
        char c = digits[i];
        if ((c >= '0' && c <= '9') || c == '.') {
            cleaned.push_back(c);
            continue;
        }
        if (c != ',') throw error(errc::not_a_number, "'" + text + "'");
        // A comma followed by exactly three digits and no decimal point is a
        // thousands separator; a comma before a later decimal point is too.
        std::size_t run = 0;
        while (i + 1 + run < digits.size() &&
               std::isdigit(static_cast<unsigned char>(digits[i + 1 + run])))
            ++run;
        bool thousands = (run == 3 && !has_period) ||
                         (has_period && digits.find('.', i) != std::string::npos);
        if (thousands) continue;  // drop separator
        if (cleaned.find('.') != std::string::npos || has_period)
            throw error(errc::not_a_number, "'" + text + "'");
        cleaned.push_back('.');  // decimal comma
    }
    if (cleaned.empty() || cleaned == "." || std::count(cleaned.begin(), cleaned.end(), '.') > 1)
        throw error(errc::not_a_number, "'" + text + "'");
    for (char c : cleaned)
        if (!(c >= '0' && c <= '9') && c != '.') throw error(errc::not_a_number, "'" + text + "'");

    char* end = nullptr;
    std::string full = num.substr(0, start) + cleaned;
    double value = std::strtod(full.c_str(), &end);
    if (!end || *end != '\0') throw error(errc::not_a_number, "'" + text + "'");

    if (!unit.empty() && !is_speed_unit(unit) && !is_time_unit(unit) && !is_percent_unit(unit))
        throw error(errc::unknown_unit, "'" + unit + "'");
    return {value, unit};
}

SpeedTestReport extract_simple(const OcrDocument& doc, const LabelSpec& spec,
                               ExtractionWarnings* warnings) {
    if (doc.tokens.empty()) throw error(errc::no_tokens, doc.source_id);
    auto rows = cluster_rows(doc.tokens, spec.row_tolerance);
    auto labels = find_labels(rows, spec);
    double diagonal = std::sqrt(doc.width * doc.width + doc.height * doc.height);

    // Flatten in row order; indices identify claimed value tokens.
    std::vector<OcrToken> flat;
    for (const auto& row : rows) flat.insert(flat.end(), row.begin(), row.end());
    std::vector<bool> claimed(flat.size(), false);

    SpeedTestReport report;
    report.source_id = doc.source_id;
    report.layout = Template::simple;

    for (Metric metric : kMetricOrder) {
        const LabelBox* label = nullptr;
        for (const auto& lb : labels) {
            if (lb.metric == metric) {
                label = &lb;
                break;
            }
        }
        if (!label) {
            if (metric == Metric::download)
                throw error(errc::no_download, doc.source_id + ": no download label");
            continue;
        }
        double lcx = (label->x + label->right) / 2;
        double lcy = (label->y + label->bottom) / 2;

        struct Candidate {
            std::size_t index;
            double weighted;
        };
        std::vector<Candidate> candidates;
        for (std::size_t i = 0; i < flat.size(); ++i) {
            if (claimed[i] || !numeric_for(flat[i], metric)) continue;
            const OcrToken& tok = flat[i];
            bool below = tok.cy() >= label->y;
            bool beside = tok.cx() >= label->right;
            if (!below && !beside) continue;
            double dx = tok.cx() - lcx;
            double dy = tok.cy() - lcy;
            if (std::sqrt(dx * dx + dy * dy) > spec.max_distance_frac * diagonal) continue;
            candidates.push_back(
                {i, std::abs(dx) * spec.beside_weight + std::abs(dy) * spec.below_weight});
        }
        if (candidates.empty()) {
            if (metric == Metric::download)
                throw error(errc::no_download, doc.source_id + ": no download value");
            continue;
        }
        std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
            if (a.weighted != b.weighted) return a.weighted < b.weighted;
            return a.index < b.index;
        });
        if (candidates.size() > 1 &&
            candidates[1].weighted <= candidates[0].weighted * (1.0 + spec.ambiguity_frac))
            throw error(errc::ambiguous_value,
                        doc.source_id + ": " + metric_name(metric) + " has two near-equal candidates");

        const OcrToken& value_token = flat[candidates[0].index];
        claimed[candidates[0].index] = true;
        Measurement m = make_measurement(value_token, metric, doc.tokens, spec);
        switch (metric) {
            case Metric::download: report.download = m; break;
            case Metric::upload: report.upload = m; break;
            case Metric::latency: report.latency = m; break;
            case Metric::jitter: report.jitter = m; break;
            case Metric::packet_loss: report.packet_loss = m; break;
        }
        if (m.unit_defaulted && warnings)
            warnings->notes.push_back(doc.source_id + ": defaulted unit for " +
                                      metric_name(metric));
    }

    report.provider = find_provider(rows, spec);
    report.server_location = find_server(rows);
    report.test_timestamp = find_timestamp(rows);
    return report;
}

std::vector<SpeedTestReport> extract_table(const OcrDocument& doc, const LabelSpec& spec,
                                           ExtractionWarnings* warnings) {
    if (doc.tokens.empty()) throw error(errc::no_tokens, doc.source_id);
    auto rows = cluster_rows(doc.tokens, spec.row_tolerance);
    auto labels = find_labels(rows, spec);

    // Header: topmost row holding at least two metric labels.
    std::optional<std::size_t> header_row;
    for (std::size_t r = 0; r < rows.size() && !header_row; ++r) {
        std::set<Metric> metrics;
        for (const auto& lb : labels)
            if (lb.row == r) metrics.insert(lb.metric);
        if (metrics.size() >= 2) header_row = r;
    }
    if (!header_row) throw error(errc::no_header, doc.source_id);

    struct Column {
        Metric metric;
        double left, right;  // span after widening by half the median gap
        double center;
    };
    std::vector<Column> columns;
    for (const auto& lb : labels) {
        if (lb.row != *header_row) continue;
        bool dup = false;
        for (const auto& c : columns) dup |= c.metric == lb.metric;
        if (!dup) columns.push_back({lb.metric, lb.x, lb.right, (lb.x + lb.right) / 2});
    }
    std::sort(columns.begin(), columns.end(),
              [](const Column& a, const Column& b) { return a.left < b.left; });
    std::vector<double> gaps;
    for (std::size_t i = 0; i + 1 < columns.size(); ++i)
        gaps.push_back(std::max(0.0, columns[i + 1].left - columns[i].right));
    std::sort(gaps.begin(), gaps.end());
    double gap = gaps.empty() ? 0.0
                              : (gaps.size() % 2 ? gaps[gaps.size() / 2]
                                                 : (gaps[gaps.size() / 2 - 1] + gaps[gaps.size() / 2]) / 2);
    for (auto& c : columns) {
        c.left -= gap / 2;
        c.right += gap / 2;
    }

    std::vector<SpeedTestReport> reports;
    auto doc_provider = find_provider(rows, spec);
    int data_row = 0;
    for (std::size_t r = *header_row + 1; r < rows.size(); ++r) {
        ++data_row;
        std::map<Metric, const OcrToken*> cells;
        for (const auto& tok : rows[r]) {
            if (!is_numeric(tok)) continue;
            const Column* best = nullptr;
            for (const auto& c : columns) {
                if (tok.cx() < c.left || tok.cx() > c.right) continue;
                if (!best || std::abs(tok.cx() - c.center) < std::abs(tok.cx() - best->center))
                    best = &c;
            }
            if (!best) {
                if (warnings)
                    warnings->notes.push_back(doc.source_id + ": numeric '" + tok.text +
                                              "' outside all columns, ignored");
                continue;
            }
            if (!numeric_for(tok, best->metric)) continue;
            if (!cells.emplace(best->metric, &tok).second && warnings)
                warnings->notes.push_back(doc.source_id + ": extra numeric in " +
                                          std::string(metric_name(best->metric)) + " column");
        }
        if (!cells.count(Metric::download)) {
            if (!rows[r].empty() && warnings)
                warnings->notes.push_back(doc.source_id + ": row " + std::to_string(data_row) +
                                          " lacks a download cell, skipped");
            continue;
        }
        SpeedTestReport report;
        report.source_id = doc.source_id;
        report.layout = Template::table;
        report.table_row = data_row;
        report.provider = doc_provider;
        for (const auto& [metric, tok] : cells) {
            Measurement m = make_measurement(*tok, metric, doc.tokens, spec);
            switch (metric) {
                case Metric::download: report.download = m; break;
                case Metric::upload: report.upload = m; break;
                case Metric::latency: report.latency = m; break;
                case Metric::jitter: report.jitter = m; break;
                case Metric::packet_loss: report.packet_loss = m; break;
            }
        }
        // A date cell stamps just its own row.
        for (std::size_t i = 0; i < rows[r].size(); ++i) {
            const std::string* time_text = i + 1 < rows[r].size() ? &rows[r][i + 1].text : nullptr;
            if (auto ts = parse_timestamp_token(rows[r][i].text, time_text)) {
                report.test_timestamp = ts;
                break;
            }
        }
        reports.push_back(std::move(report));
    }
    if (reports.empty()) throw error(errc::empty_table, doc.source_id);
    return reports;
}

namespace {

std::optional<SpeedUnit> speed_unit_of(const std::string& u) {
    if (u == "mbps") return SpeedUnit::mbps;
    if (u == "kbps") return SpeedUnit::kbps;
    if (u == "gbps") return SpeedUnit::gbps;
    return std::nullopt;
}

std::optional<TimeUnit> time_unit_of(const std::string& u) {
    if (u == "ms") return TimeUnit::ms;
    if (u == "s") return TimeUnit::s;
    return std::nullopt;
}

bool contains_ci(const std::string& haystack, const std::string& needle) {
    return to_lower(haystack).find(to_lower(needle)) != std::string::npos;
}

}  // namespace

FilterResult filter_false_positives(std::vector<SpeedTestReport> reports,
                                    const PlausibilityBounds& bounds,
                                    const ProviderFilter& provider) {
    FilterResult result;
    for (auto& report : reports) {
        std::string reason;
        auto down_unit = speed_unit_of(report.download.unit);
        if (!down_unit) {
            reason = "download unit unreadable";
        } else {
            double mbps = to_mbps(report.download.value, *down_unit);
            if (mbps < bounds.download_min_mbps || mbps > bounds.download_max_mbps)
                reason = "download out of bounds";
        }
        if (reason.empty() && report.upload) {
            auto unit = speed_unit_of(report.upload->unit);
            double mbps = unit ? to_mbps(report.upload->value, *unit) : -1;
            if (mbps < bounds.upload_min_mbps || mbps > bounds.upload_max_mbps)
                reason = "upload out of bounds";
        }
        if (reason.empty() && report.latency) {
            auto unit = time_unit_of(report.latency->unit);
            double ms = unit ? to_ms(report.latency->value, *unit) : -1;
            if (ms < bounds.latency_min_ms || ms > bounds.latency_max_ms)
                reason = "latency out of bounds";
        }
        if (reason.empty() && provider.enabled) {
            bool ok = report.provider && contains_ci(*report.provider, provider.isp);
            if (!ok) {
                auto it = provider.post_text_by_source.find(report.source_id);
                ok = it != provider.post_text_by_source.end() && contains_ci(it->second, provider.isp);
            }
            if (!ok) reason = "provider mismatch";
        }
        if (reason.empty()) result.kept.push_back(std::move(report));
        else result.rejected.push_back({std::move(report), reason});
    }
    return result;
}

std::string reports_csv(const std::vector<SpeedTestReport>& reports) {
    std::string out =
        "source_id,timestamp,provider,template,row,download_mbps,upload_mbps,latency_ms,"
        "jitter_ms,loss_pct,server_location\n";
    for (const auto& r : reports) {
        out += csv_escape(r.source_id);
        out += ',';
        if (r.test_timestamp) out += to_iso_datetime(*r.test_timestamp);
        out += ',';
        if (r.provider) out += csv_escape(*r.provider);
        out += ',';
        out += r.layout == Template::table ? "TABLE" : "SIMPLE";
        out += ',';
        if (r.table_row) out += std::to_string(*r.table_row);
        out += ',';
        if (auto u = speed_unit_of(r.download.unit)) out += format_double(to_mbps(r.download.value, *u));
        out += ',';
        if (r.upload)
            if (auto u = speed_unit_of(r.upload->unit)) out += format_double(to_mbps(r.upload->value, *u));
        out += ',';
        if (r.latency)
            if (auto u = time_unit_of(r.latency->unit)) out += format_double(to_ms(r.latency->value, *u));
        out += ',';
        if (r.jitter)
            if (auto u = time_unit_of(r.jitter->unit)) out += format_double(to_ms(r.jitter->value, *u));
        out += ',';
        if (r.packet_loss) out += format_double(r.packet_loss->value);
        out += ',';
        if (r.server_location) out += csv_escape(*r.server_location);
        out += '\n';
    }
    return out;
}

}  // namespace netlens::speedtest
