#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace netlens::speedtest {

/// One recognized text fragment. Pixel coordinates, origin top-left.
struct OcrToken {
    std::string text;
    double x = 0, y = 0, w = 0, h = 0;
    double confidence = 1.0;

    double cx() const { return x + w / 2; }
    double cy() const { return y + h / 2; }
    double right() const { return x + w; }
    double bottom() const { return y + h; }
};

struct OcrDocument {
    std::string source_id;
    double width = 0, height = 0;
    std::vector<OcrToken> tokens;
};

struct OcrLoadResult {
    OcrDocument doc;
    std::vector<std::string> warnings;  // clamped bboxes etc.
};

/// JSON {source_id, width, height, tokens:[{text,x,y,w,h,confidence}]}.
/// Out-of-bounds boxes are clamped with a warning.
OcrLoadResult load_ocr_document(const std::string& json_text);
std::string ocr_document_json(const OcrDocument& doc);

enum class Metric { download, upload, latency, jitter, packet_loss };

const char* metric_name(Metric m);

enum class SpeedUnit { mbps, kbps, gbps };
enum class TimeUnit { ms, s };

double to_mbps(double value, SpeedUnit unit);
double to_ms(double value, TimeUnit unit);

struct Measurement {
    double value = 0.0;
    std::string unit;          // as written, canonical lowercase
    bool unit_defaulted = false;  // no unit token nearby; default attached
};

enum class Template { simple, table };

struct SpeedTestReport {
    std::string source_id;
    std::optional<std::string> provider;
    Measurement download;  // required; extraction fails without it
    std::optional<Measurement> upload;
    std::optional<Measurement> latency;
    std::optional<Measurement> jitter;
    std::optional<Measurement> packet_loss;
    std::optional<std::int64_t> test_timestamp;  // epoch seconds
    std::optional<std::string> server_location;
    Template layout = Template::simple;
    std::optional<int> table_row;  // 1-based data row, table layouts only
};

/// Label synonyms and the relative-geometry knobs of the extractor. All
/// thresholds are fractions of document-local quantities, so extraction is
/// invariant under translation and uniform scaling.
struct LabelSpec {
    std::map<Metric, std::set<std::string>> synonyms;
    std::set<std::string> provider_names;
    double beside_weight = 1.0;
    double below_weight = 0.8;
    double max_distance_frac = 0.35;  // of the image diagonal
    double row_tolerance = 0.6;       // of the median token height
    double unit_attach_factor = 2.0;  // of the value token height
    double ambiguity_frac = 0.05;
};

LabelSpec default_label_spec();

/// Rows of tokens, top-to-bottom; tokens within a row left-to-right.
/// Grouping threshold is row_tolerance x median token height.
std::vector<std::vector<OcrToken>> cluster_rows(const std::vector<OcrToken>& tokens,
                                                double row_tolerance = 0.6);

/// TABLE when at least two rows carry multiple numeric cells while download
/// labels appear at most once (as column headers); SIMPLE otherwise.
Template classify_template(const OcrDocument& doc, const LabelSpec& spec);

/// Parses "105.4", "105,4", "1,024", "28ms". A comma followed by exactly
/// three digits and no period is a thousands separator. Throws
/// error(not_a_number) / error(unknown_unit).
std::pair<double, std::string> parse_value_unit(const std::string& text);

struct ExtractionWarnings {
    std::vector<std::string> notes;
};

/// Label-anchored extraction for single-report layouts. Candidate values sit
/// below or beside their label within max_distance_frac of the diagonal; the
/// nearest by weighted distance wins. Two near-equal candidates raise
/// error(ambiguous_value) instead of guessing.
SpeedTestReport extract_simple(const OcrDocument& doc, const LabelSpec& spec,
                               ExtractionWarnings* warnings = nullptr);

/// Header-row driven extraction for multi-report tables: one report per data
/// row, cells assigned by column span. Rows without a download cell are
/// skipped with a warning.
std::vector<SpeedTestReport> extract_table(const OcrDocument& doc, const LabelSpec& spec,
                                           ExtractionWarnings* warnings = nullptr);

struct PlausibilityBounds {
    double download_min_mbps = 0.1, download_max_mbps = 2000.0;
    double upload_min_mbps = 0.1, upload_max_mbps = 500.0;
    double latency_min_ms = 1.0, latency_max_ms = 5000.0;
};

struct ProviderFilter {
    bool enabled = false;
    std::string isp;  // matched case-insensitively
    /// Originating post text per source id; checked when the report itself
    /// names no provider containing the ISP.
    std::map<std::string, std::string> post_text_by_source;
};

struct RejectedReport {
    SpeedTestReport report;
    std::string reason;
};

struct FilterResult {
    std::vector<SpeedTestReport> kept;
    std::vector<RejectedReport> rejected;
};

/// Values are unit-normalized before the bounds check.
FilterResult filter_false_positives(std::vector<SpeedTestReport> reports,
                                    const PlausibilityBounds& bounds = {},
                                    const ProviderFilter& provider = {});

std::string reports_csv(const std::vector<SpeedTestReport>& reports);

}  // namespace netlens::speedtest
