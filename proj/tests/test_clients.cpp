#include <doctest.h>

#include <filesystem>

#include <json.hpp>

#include "netlens/clients.hpp"
#include "netlens/errors.hpp"
#include "netlens/util.hpp"

using namespace netlens;
using namespace netlens::clients;
using nlohmann::json;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("netlens-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

ProviderConfig config_with(const std::filesystem::path& cache) {
    ProviderConfig cfg;
    cfg.endpoint = "http://service.invalid/score";
    cfg.max_requests_per_second = 100.0;
    cfg.max_retries = 2;
    cfg.backoff_base_ms = 10;
    cfg.cache_dir = cache;
    cfg.batch_size = 2;
    return cfg;
}

std::string scores_body(const std::vector<std::array<double, 3>>& scores) {
    json body;
    body["scores"] = json::array();
    for (const auto& s : scores)
        body["scores"].push_back({{"positive", s[0]}, {"negative", s[1]}, {"neutral", s[2]}});
    return body.dump();
}

}  // namespace

TEST_CASE("cache entries survive a byte-exact round trip") {
    CacheStore store(fresh_dir("cache"));
    std::string payload = "{\"payload\":{\"positive\":0.5,\"negative\":0.3,\"neutral\":0.2}}";
    store.put("abc123", payload);
    auto back = store.get("abc123");
    REQUIRE(back.has_value());
    CHECK(*back == payload);
    CHECK_FALSE(store.get("missing").has_value());
}

TEST_CASE("rate limiter honors the per-second budget on a virtual clock") {
    VirtualClock clock;
    RateLimiter limiter(4.0, clock);
    std::vector<std::int64_t> issue_times;
    for (int i = 0; i < 20; ++i) {
        limiter.acquire();
        issue_times.push_back(clock.now_ms());
    }
    // No sliding 1-second window may hold more than 4 issues.
    for (std::size_t i = 0; i < issue_times.size(); ++i) {
        std::size_t in_window = 0;
        for (std::size_t j = 0; j < issue_times.size(); ++j)
            if (issue_times[j] >= issue_times[i] && issue_times[j] < issue_times[i] + 1000)
                ++in_window;
        CHECK(in_window <= 4);
    }
    // And nothing slept for real: the virtual clock advanced instead.
    CHECK(clock.now_ms() >= 19 * 250);
}

TEST_CASE("remote_sentiment serves cache hits without any network call") {
    auto dir = fresh_dir("sent-cache");
    VirtualClock clock;
    std::size_t calls = 0;
    Transport counting = [&](const std::string&, const std::string&,
                             const std::string&) -> std::optional<HttpResponse> {
        ++calls;
        return HttpResponse{200, scores_body({{0.5, 0.3, 0.2}})};
    };

    auto first = remote_sentiment({"hello"}, config_with(dir), counting, clock);
    CHECK(first.network_calls == 1);
    REQUIRE(first.scores[0].has_value());
    CHECK(first.scores[0]->positive == 0.5);

    auto second = remote_sentiment({"hello"}, config_with(dir), counting, clock);
    CHECK(second.network_calls == 0);
    CHECK(calls == 1);
    CHECK(second.scores[0] == first.scores[0]);
}

TEST_CASE("responses off the simplex are renormalized with a warning") {
    auto dir = fresh_dir("sent-renorm");
    VirtualClock clock;
    Transport transport = [](const std::string&, const std::string&,
                             const std::string&) -> std::optional<HttpResponse> {
        return HttpResponse{200, scores_body({{0.6, 0.6, 0.0}})};
    };
    auto result = remote_sentiment({"text"}, config_with(dir), transport, clock);
    REQUIRE(result.scores[0].has_value());
    CHECK(result.scores[0]->positive == doctest::Approx(0.5));
    CHECK(result.scores[0]->negative == doctest::Approx(0.5));
    CHECK(result.scores[0]->neutral == 0.0);
    CHECK_FALSE(result.warnings.empty());
}

TEST_CASE("auth failures abort immediately, transients retry with backoff") {
    auto dir = fresh_dir("sent-auth");
    VirtualClock clock;
    std::size_t calls = 0;
    Transport denied = [&](const std::string&, const std::string&,
                           const std::string&) -> std::optional<HttpResponse> {
        ++calls;
        return HttpResponse{401, "no"};
    };
    CHECK_THROWS_AS(remote_sentiment({"x"}, config_with(dir), denied, clock), error);
    CHECK(calls == 1);  // never retried

    std::size_t attempts = 0;
    Transport flaky = [&](const std::string&, const std::string&,
                          const std::string&) -> std::optional<HttpResponse> {
        ++attempts;
        if (attempts < 3) return std::nullopt;  // network failure
        return HttpResponse{200, scores_body({{0.1, 0.1, 0.8}})};
    };
    auto dir2 = fresh_dir("sent-flaky");
    auto recovered = remote_sentiment({"x"}, config_with(dir2), flaky, clock);
    CHECK(attempts == 3);
    CHECK(recovered.failed_indices.empty());
    REQUIRE(recovered.scores[0].has_value());

    std::size_t always = 0;
    Transport dead = [&](const std::string&, const std::string&,
                         const std::string&) -> std::optional<HttpResponse> {
        ++always;
        return std::nullopt;
    };
    auto dir3 = fresh_dir("sent-dead");
    auto exhausted = remote_sentiment({"a", "b", "c"}, config_with(dir3), dead, clock);
    // batch_size 2: two batches, each retried max_retries times.
    CHECK(exhausted.failed_indices == std::vector<std::size_t>{0, 1, 2});
    CHECK(always == 6);
    for (const auto& s : exhausted.scores) CHECK_FALSE(s.has_value());
}

TEST_CASE("malformed responses raise instead of fabricating scores") {
    auto dir = fresh_dir("sent-malformed");
    VirtualClock clock;
    Transport garbled = [](const std::string&, const std::string&,
                           const std::string&) -> std::optional<HttpResponse> {
        return HttpResponse{200, "{\"unexpected\":true}"};
    };
    CHECK_THROWS_AS(remote_sentiment({"x"}, config_with(dir), garbled, clock), error);
}

TEST_CASE("remote_ocr caches by reference hash and clamps geometry") {
    auto dir = fresh_dir("ocr-cache");
    VirtualClock clock;
    std::size_t calls = 0;
    Transport backend = [&](const std::string&, const std::string&,
                            const std::string&) -> std::optional<HttpResponse> {
        ++calls;
        return HttpResponse{
            200,
            R"({"source_id":"img1","width":100,"height":100,
                "tokens":[{"text":"DOWNLOAD","x":90,"y":10,"w":30,"h":10}]})"};
    };
    std::vector<std::string> warnings;
    auto doc = remote_ocr("img1", config_with(dir), backend, clock, &warnings);
    CHECK(doc.tokens.size() == 1);
    CHECK(doc.tokens[0].w == 10.0);  // clamped to the image edge
    CHECK_FALSE(warnings.empty());

    auto again = remote_ocr("img1", config_with(dir), backend, clock);
    CHECK(again.tokens.size() == 1);
    CHECK(calls == 1);

    Transport dead = [](const std::string&, const std::string&,
                        const std::string&) -> std::optional<HttpResponse> {
        return std::nullopt;
    };
    auto dir2 = fresh_dir("ocr-dead");
    try {
        remote_ocr("gone", config_with(dir2), dead, clock);
        FAIL("expected image_unavailable");
    } catch (const error& e) {
        CHECK(e.code() == errc::image_unavailable);
    }
}

TEST_CASE("fixture providers replay the cache layout and fail closed") {
    auto dir = fresh_dir("fixture-replay");
    // Populate using the same layout remote_sentiment writes.
    json entry;
    entry["payload"] = {{"positive", 0.7}, {"negative", 0.2}, {"neutral", 0.1}};
    write_file(dir / (sentiment_cache_key("cached text") + ".json"), entry.dump());

    FixtureSentimentProvider provider(dir);
    auto score = provider.score("cached text");
    CHECK(score.positive == doctest::Approx(0.7));

    try {
        provider.score("never stored");
        FAIL("expected fixture_miss");
    } catch (const error& e) {
        CHECK(e.code() == errc::fixture_miss);
        CHECK(std::string(e.what()).find(sentiment_cache_key("never stored")) !=
              std::string::npos);
    }

    auto empty = fresh_dir("fixture-empty");
    FixtureSentimentProvider nothing(empty);
    CHECK_THROWS_AS(nothing.score("anything"), error);

    write_file(empty / (ocr_cache_key("img7") + ".json"),
               R"({"source_id":"img7","width":10,"height":10,
                   "tokens":[{"text":"5","x":1,"y":1,"w":2,"h":2}]})");
    FixtureOcrProvider ocr(empty);
    CHECK(ocr.fetch("img7").tokens.size() == 1);
    CHECK_THROWS_AS(ocr.fetch("img8"), error);
}
