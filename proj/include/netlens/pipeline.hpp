#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "netlens/dates.hpp"
#include "netlens/speedtest.hpp"

namespace netlens::pipeline {

struct SentimentSettings {
    std::string provider = "lexicon";  // lexicon | remote | fixture
    std::filesystem::path lexicon_path;
    double tau = 0.7;
    bool peaks_include_comments = false;
    std::string endpoint;
    std::string credential_env;
    double rate_per_sec = 4.0;
    int max_retries = 3;
    int backoff_base_ms = 200;
    std::filesystem::path cache_dir;  // empty disables the score cache
};

struct PeaksSettings {
    std::size_t k = 3;
    int min_separation_days = 2;
    std::size_t cloud_k = 10;
};

struct OutageSettings {
    int window_days = 28;
    double z = 3.0;
    std::size_t min_count = 5;
    bool strong_only = false;
    std::size_t mine_top_m = 30;
};

struct PopularitySettings {
    double percentile = 99.0;
    std::size_t report_top_k = 10;
};

struct SpeedtestSettings {
    std::filesystem::path ocr_dir;
    speedtest::PlausibilityBounds bounds;
    bool provider_filter = true;
    std::string isp = "starlink";
};

struct TrendsSettings {
    std::vector<double> fractions{0.95, 0.90};
    std::filesystem::path launches_path;  // optional
    std::filesystem::path users_path;     // optional
    bool svg = true;
};

struct RunConfig {
    std::filesystem::path posts_path;
    std::filesystem::path comments_path;
    Date window_start;
    Date window_end;
    std::filesystem::path stopwords_path;
    std::filesystem::path keyword_library_path;
    std::string brand = "Starlink";
    SentimentSettings sentiment;
    PeaksSettings peaks;
    OutageSettings outage;
    PopularitySettings popularity;
    SpeedtestSettings speedtest;
    TrendsSettings trends;
    std::filesystem::path out_dir;
    std::uint64_t seed = 42;
};

/// Parses the JSON config; unknown fields are rejected so typos surface as
/// ConfigError instead of silently falling back to defaults.
RunConfig load_run_config(const std::filesystem::path& file);
std::string run_config_json(const RunConfig& config);

struct RunResult {
    int exit_code = 0;  // 0 ok, 1 partial (per-item errors), 2 fatal
    std::vector<std::string> artifacts;
    std::size_t item_errors = 0;
};

/// Commands: ingest, sentiment, peaks, outages, popular, speedtest, trends,
/// report. Artifacts land under config.out_dir; a stage writes the same
/// bytes whether run alone or as part of `report`.
RunResult run(const std::string& command, const RunConfig& config);

}  // namespace netlens::pipeline
