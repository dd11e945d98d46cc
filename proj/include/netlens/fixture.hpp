#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "netlens/dates.hpp"
#include "netlens/rng.hpp"
#include "netlens/speedtest.hpp"

namespace netlens::fixture {

/// Synthetic speed-test screenshots with planted values, used both by the
/// corpus generator and by the extractor robustness tests. jitter_frac
/// perturbs each token by up to that fraction of its height.
struct SimpleLayoutOptions {
    std::string provider = "Ookla";
    std::string download = "105.4";
    std::string upload = "17.6";
    int latency_ms = 28;
    bool attached_units = true;   // "105.4Mbps" vs separate unit tokens
    bool latency_attached = true; // "28ms" vs "28" "ms"
    bool with_date = false;
    Date date{};
    double jitter_frac = 0.0;
};

speedtest::OcrDocument simple_ocr_doc(const std::string& source_id,
                                      const SimpleLayoutOptions& options, Rng& rng);

struct TableLayoutOptions {
    std::string provider = "Ookla";
    bool with_dates = false;
    std::vector<std::array<std::string, 4>> rows;  // date, ping, download, upload
    double jitter_frac = 0.0;
};

speedtest::OcrDocument table_ocr_doc(const std::string& source_id,
                                     const TableLayoutOptions& options, Rng& rng);

/// A day that must surface as a sentiment peak, with the term its word
/// cloud should be dominated by.
struct PlantedPeak {
    Date date;
    bool positive = true;
    std::size_t count = 0;  // strong posts planted that day, exactly
    std::string dominant;
};

/// A day that must be flagged by the outage detector.
struct PlantedOutage {
    Date date;
    std::size_t comments = 10;
    std::size_t hits_per_comment = 3;
};

struct PlantedPopular {
    Date date;
    std::string unigram = "roaming";
    std::string bigram = "roaming enabled";
    std::int64_t upvotes = 500;
    std::size_t comments = 110;
};

struct MonthSpeedPlan {
    double median_mbps = 0.0;
    std::size_t samples = 15;      // odd, so the median is a planted value
    std::size_t table_docs = 1;
    std::size_t rows_per_table = 3;
    std::size_t strong_pos = 0;    // sharing posts planted strong per month
    std::size_t strong_neg = 0;
};

struct FixtureSpec {
    Date window_start;
    Date window_end;
    int base_posts_per_day_min = 4;
    int base_posts_per_day_max = 6;
    int comments_per_post_min = 2;
    int comments_per_post_max = 9;
    std::vector<PlantedPeak> peaks;
    std::vector<PlantedOutage> outages;
    std::size_t minor_outage_days = 18;  // small spikes below the flag floor
    std::size_t positive_keyword_decoys = 12;
    PlantedPopular popular;
    std::vector<MonthSpeedPlan> speed_by_month;  // one per window month
    std::size_t absurd_value_docs = 3;
    std::size_t foreign_provider_docs = 3;
    std::uint64_t seed = 42;
};

/// The 24-month corpus used by the golden end-to-end test.
FixtureSpec default_fixture_spec(std::uint64_t seed = 42);

struct FixtureResult {
    std::filesystem::path dir;
    std::filesystem::path config_path;
    std::filesystem::path expected_path;
    std::size_t posts = 0;
    std::size_t comments = 0;
    std::size_t ocr_docs = 0;
};

/// Writes posts.ndjson, comments.ndjson, ocr/, launches.csv, users.csv,
/// expected.json (ground truth) and config.json into out_dir. The generated
/// corpus is validated against the planted outcomes with the production
/// analyses; an unrealizable spec raises error(spec_infeasible).
FixtureResult generate_fixture(const FixtureSpec& spec, const std::filesystem::path& out_dir,
                               const std::filesystem::path& data_dir);

}  // namespace netlens::fixture
