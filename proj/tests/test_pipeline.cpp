#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "netlens/errors.hpp"
#include "netlens/fixture.hpp"
#include "netlens/pipeline.hpp"
#include "netlens/util.hpp"

using namespace netlens;
using nlohmann::json;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("netlens-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

const std::filesystem::path kData = NETLENS_DATA_DIR;

/// Two planted months, one peak, one outage: enough corpus for command-level
/// tests without the full golden fixture.
fixture::FixtureSpec small_spec() {
    fixture::FixtureSpec spec;
    spec.seed = 7;
    spec.window_start = date_from_ymd(2021, 1, 1);
    spec.window_end = date_from_ymd(2021, 2, 28);
    spec.peaks = {{date_from_ymd(2021, 2, 9), true, 9, "preorder"}};
    spec.outages = {{date_from_ymd(2021, 2, 1), 8, 3}};
    spec.minor_outage_days = 3;
    spec.positive_keyword_decoys = 2;
    spec.popular.date = date_from_ymd(2021, 1, 23);
    spec.speed_by_month = {{80.5, 15, 1, 3, 2, 1}, {95.5, 15, 1, 3, 0, 0}};
    spec.absurd_value_docs = 1;
    spec.foreign_provider_docs = 1;
    return spec;
}

}  // namespace

TEST_CASE("config loading rejects unknown fields and bad values") {
    auto dir = fresh_dir("config");
    write_file(dir / "posts.ndjson", "");
    write_file(dir / "comments.ndjson", "");

    json good;
    good["posts"] = "posts.ndjson";
    good["comments"] = "comments.ndjson";
    good["window"] = {{"start", "2021-01-01"}, {"end", "2021-03-01"}};
    write_file(dir / "ok.json", good.dump());
    auto cfg = pipeline::load_run_config(dir / "ok.json");
    CHECK(cfg.posts_path == dir / "posts.ndjson");
    CHECK(cfg.sentiment.tau == 0.7);
    CHECK(cfg.peaks.k == 3);
    CHECK(cfg.trends.fractions == std::vector<double>{0.95, 0.90});

    json typo = good;
    typo["peeks"] = json::object();
    write_file(dir / "typo.json", typo.dump());
    CHECK_THROWS_AS(pipeline::load_run_config(dir / "typo.json"), error);

    json backwards = good;
    backwards["window"] = {{"start", "2021-03-01"}, {"end", "2021-01-01"}};
    write_file(dir / "backwards.json", backwards.dump());
    CHECK_THROWS_AS(pipeline::load_run_config(dir / "backwards.json"), error);

    json bad_tau = good;
    bad_tau["sentiment"] = {{"tau", 0.4}};
    write_file(dir / "tau.json", bad_tau.dump());
    CHECK_THROWS_AS(pipeline::load_run_config(dir / "tau.json"), error);
}

TEST_CASE("missing input files fail fast with ConfigError") {
    auto dir = fresh_dir("missing");
    json cfg;
    cfg["posts"] = "absent.ndjson";
    cfg["comments"] = "also-absent.ndjson";
    cfg["window"] = {{"start", "2021-01-01"}, {"end", "2021-03-01"}};
    cfg["out"] = (dir / "out").string();
    write_file(dir / "config.json", cfg.dump());
    auto loaded = pipeline::load_run_config(dir / "config.json");
    try {
        pipeline::run("ingest", loaded);
        FAIL("expected config_error");
    } catch (const error& e) {
        CHECK(e.code() == errc::config_error);
    }
    CHECK_THROWS_AS(pipeline::run("nonsense", loaded), error);
}

TEST_CASE("the pipeline reproduces a small fixture end to end") {
    auto dir = fresh_dir("small-fixture");
    auto fx = fixture::generate_fixture(small_spec(), dir, kData);
    auto cfg = pipeline::load_run_config(fx.config_path);
    cfg.out_dir = dir / "out";

    auto result = pipeline::run("report", cfg);
    CHECK(result.exit_code == 0);
    CHECK(result.item_errors == 0);

    auto expected = json::parse(read_file(fx.expected_path));
    auto peaks = json::parse(read_file(cfg.out_dir / "peaks.json"));
    REQUIRE(peaks.size() == expected["peaks"].size());
    CHECK(peaks[0]["date"] == expected["peaks"][0]["date"]);
    CHECK(peaks[0]["polarity"] == expected["peaks"][0]["polarity"]);
    CHECK(peaks[0]["count"] == expected["peaks"][0]["count"]);

    // Flagged days match the plant exactly.
    std::set<std::string> flagged;
    std::istringstream series(read_file(cfg.out_dir / "outage_series.csv"));
    std::string line;
    std::getline(series, line);  // header
    while (std::getline(series, line)) {
        auto fields = split_csv_line(line);
        if (fields[2] == "1") flagged.insert(fields[0]);
    }
    std::set<std::string> expected_flags;
    for (const auto& d : expected["outage_flagged_days"]) expected_flags.insert(d);
    CHECK(flagged == expected_flags);

    // The planted popular post tops its month with the planted terms.
    auto popular = json::parse(read_file(cfg.out_dir / "popular.json"));
    bool found = false;
    for (const auto& month : popular) {
        if (month["month"] != expected["popular"]["month"]) continue;
        for (const auto& report : month["reports"]) {
            if (report["post_id"] != expected["popular"]["post_id"]) continue;
            found = true;
            CHECK(report["top_unigrams"][0]["term"] == expected["popular"]["top_unigram"]);
            CHECK(report["top_bigrams"][0]["term"] == expected["popular"]["top_bigram"]);
        }
    }
    CHECK(found);

    // Artifacts are identical whether staged singly or via report.
    auto cfg2 = pipeline::load_run_config(fx.config_path);
    cfg2.out_dir = dir / "out2";
    pipeline::run("peaks", cfg2);
    CHECK(read_file(cfg2.out_dir / "peaks.json") == read_file(cfg.out_dir / "peaks.json"));
    CHECK(read_file(cfg2.out_dir / "daily_sentiment.csv") ==
          read_file(cfg.out_dir / "daily_sentiment.csv"));
}

TEST_CASE("unrealizable fixture specs are rejected") {
    auto dir = fresh_dir("infeasible");

    auto even = small_spec();
    even.speed_by_month[0].samples = 14;  // even: no exact middle
    CHECK_THROWS_AS(fixture::generate_fixture(even, dir / "a", kData), error);

    auto short_plan = small_spec();
    short_plan.speed_by_month.pop_back();
    CHECK_THROWS_AS(fixture::generate_fixture(short_plan, dir / "b", kData), error);

    auto bad_dominant = small_spec();
    bad_dominant.peaks[0].dominant = "love";  // sentiment-bearing term
    CHECK_THROWS_AS(fixture::generate_fixture(bad_dominant, dir / "c", kData), error);

    // A lexicon without the generator's word pools cannot plant sentiment.
    auto data2 = fresh_dir("infeasible-data");
    write_file(data2 / "lexicon_default.csv", "love,1\n");
    std::filesystem::copy_file(kData / "stopwords_en.txt", data2 / "stopwords_en.txt");
    std::filesystem::copy_file(kData / "outage_keywords.txt", data2 / "outage_keywords.txt");
    try {
        fixture::generate_fixture(small_spec(), dir / "d", data2);
        FAIL("expected spec_infeasible");
    } catch (const error& e) {
        CHECK(e.code() == errc::spec_infeasible);
    }
}

TEST_CASE("run configs serialize and reload equivalently") {
    auto dir = fresh_dir("roundtrip");
    write_file(dir / "posts.ndjson", "");
    write_file(dir / "comments.ndjson", "");
    json base;
    base["posts"] = "posts.ndjson";
    base["comments"] = "comments.ndjson";
    base["window"] = {{"start", "2021-01-01"}, {"end", "2021-03-01"}};
    base["peaks"] = {{"k", 5}, {"min_separation_days", 3}};
    base["seed"] = 99;
    write_file(dir / "config.json", base.dump());
    auto cfg = pipeline::load_run_config(dir / "config.json");
    write_file(dir / "echo.json", pipeline::run_config_json(cfg));
    auto again = pipeline::load_run_config(dir / "echo.json");
    CHECK(again.peaks.k == 5);
    CHECK(again.peaks.min_separation_days == 3);
    CHECK(again.seed == 99);
    CHECK(again.window_start == cfg.window_start);
}
