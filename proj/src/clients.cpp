#include "netlens/clients.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <json.hpp>

#include "netlens/errors.hpp"
#include "netlens/util.hpp"

namespace netlens::clients {

using nlohmann::json;

std::int64_t SystemClock::now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

void SystemClock::sleep_ms(std::int64_t ms) {
    std::this_thread::sleep_for(std::chrono::milliseconds(ms));
}

RateLimiter::RateLimiter(double per_second, Clock& clock)
    : interval_ms_(1000.0 / per_second), clock_(clock) {
    if (!(per_second > 0)) throw error(errc::config_error, "rate must be > 0");
}

void RateLimiter::acquire() {
    std::int64_t now = clock_.now_ms();
    if (now < next_allowed_ms_) {
        clock_.sleep_ms(next_allowed_ms_ - now);
        now = next_allowed_ms_;
    }
    next_allowed_ms_ = now + static_cast<std::int64_t>(std::llround(interval_ms_));
}

CacheStore::CacheStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::optional<std::string> CacheStore::get(const std::string& key) const {
    auto path = dir_ / (key + ".json");
    if (!std::filesystem::exists(path)) return std::nullopt;
    return read_file(path);
}

void CacheStore::put(const std::string& key, const std::string& payload) const {
    // Write-then-rename keeps concurrent readers off half-written entries.
    auto final_path = dir_ / (key + ".json");
    auto tmp_path = dir_ / (key + ".tmp");
    write_file(tmp_path, payload);
    std::filesystem::rename(tmp_path, final_path);
}

std::string sentiment_cache_key(const std::string& text) {
    return hex64(fnv1a64("sentiment:" + text));
}

std::string ocr_cache_key(const std::string& image_ref) {
    return hex64(fnv1a64("ocr:" + image_ref));
}

namespace {

std::string credential(const ProviderConfig& config) {
    if (config.credential_env.empty()) return {};
    const char* v = std::getenv(config.credential_env.c_str());
    return v ? v : "";
}

/// Maps one response object to a score, renormalizing mild drift.
sentiment::SentimentScore map_score(const json& j, std::vector<std::string>& warnings) {
    if (!j.is_object() || !j.contains("positive") || !j.contains("negative") ||
        !j.contains("neutral"))
        throw error(errc::malformed_response, "score object missing components");
    double p = j["positive"].get<double>();
    double n = j["negative"].get<double>();
    double u = j["neutral"].get<double>();
    if (p < 0 || n < 0 || u < 0) throw error(errc::malformed_response, "negative score component");
    double sum = p + n + u;
    if (sum <= 0) throw error(errc::malformed_response, "score components sum to zero");
    if (std::abs(sum - 1.0) > 1e-9) {
        warnings.push_back("renormalized response summing to " + format_double(sum));
        p /= sum;
        n /= sum;
        u /= sum;
    }
    return {p, n, u};
}

struct PostOutcome {
    enum class Kind { ok, transient, auth } kind;
    std::string body;
};

PostOutcome post_with_retry(const std::string& url, const std::string& payload,
                            const ProviderConfig& config, const Transport& transport,
                            Clock& clock, RateLimiter& limiter) {
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
        if (attempt > 0)
            clock.sleep_ms(static_cast<std::int64_t>(config.backoff_base_ms) * (1LL << (attempt - 1)));
        limiter.acquire();
        auto response = transport(url, payload, credential(config));
        if (!response) continue;  // network failure, transient
        if (response->status == 401 || response->status == 403)
            return {PostOutcome::Kind::auth, response->body};
        if (response->status == 429 || response->status >= 500) continue;
        if (response->status >= 200 && response->status < 300)
            return {PostOutcome::Kind::ok, response->body};
        return {PostOutcome::Kind::transient, response->body};  // unexpected 4xx
    }
    return {PostOutcome::Kind::transient, {}};
}

}  // namespace

RemoteSentimentResult remote_sentiment(const std::vector<std::string>& texts,
                                       const ProviderConfig& config, const Transport& transport,
                                       Clock& clock) {
    RemoteSentimentResult result;
    result.scores.resize(texts.size());
    CacheStore cache(config.cache_dir);

    std::vector<std::size_t> misses;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (auto hit = cache.get(sentiment_cache_key(texts[i]))) {
            json entry = json::parse(*hit, nullptr, false);
            if (!entry.is_discarded() && entry.contains("payload")) {
                result.scores[i] = map_score(entry["payload"], result.warnings);
                continue;
            }
        }
        misses.push_back(i);
    }

    RateLimiter limiter(config.max_requests_per_second, clock);
    for (std::size_t off = 0; off < misses.size(); off += config.batch_size) {
        std::size_t count = std::min(config.batch_size, misses.size() - off);
        json request;
        request["texts"] = json::array();
        for (std::size_t k = 0; k < count; ++k) request["texts"].push_back(texts[misses[off + k]]);

        auto outcome =
            post_with_retry(config.endpoint, request.dump(), config, transport, clock, limiter);
        ++result.network_calls;
        if (outcome.kind == PostOutcome::Kind::auth)
            throw error(errc::auth_error, "endpoint rejected credentials");
        if (outcome.kind == PostOutcome::Kind::transient) {
            for (std::size_t k = 0; k < count; ++k) result.failed_indices.push_back(misses[off + k]);
            continue;
        }
        json body = json::parse(outcome.body, nullptr, false);
        if (body.is_discarded() || !body.contains("scores") || !body["scores"].is_array() ||
            body["scores"].size() != count)
            throw error(errc::malformed_response, "scores array missing or wrong length");
        for (std::size_t k = 0; k < count; ++k) {
            std::size_t index = misses[off + k];
            auto score = map_score(body["scores"][k], result.warnings);
            result.scores[index] = score;
            json entry;
            entry["input_hash"] = sentiment_cache_key(texts[index]);
            entry["provider"] = "remote-sentiment";
            entry["payload"] = {{"positive", score.positive},
                                {"negative", score.negative},
                                {"neutral", score.neutral}};
            entry["stored_at_ms"] = clock.now_ms();
            cache.put(sentiment_cache_key(texts[index]), entry.dump(2));
        }
    }
    return result;
}

speedtest::OcrDocument remote_ocr(const std::string& image_ref, const ProviderConfig& config,
                                  const Transport& transport, Clock& clock,
                                  std::vector<std::string>* warnings) {
    CacheStore cache(config.cache_dir);
    std::string key = ocr_cache_key(image_ref);
    std::string payload;
    if (auto hit = cache.get(key)) {
        payload = *hit;
    } else {
        RateLimiter limiter(config.max_requests_per_second, clock);
        json request;
        request["image_ref"] = image_ref;
        auto outcome =
            post_with_retry(config.endpoint, request.dump(), config, transport, clock, limiter);
        if (outcome.kind == PostOutcome::Kind::auth)
            throw error(errc::auth_error, "endpoint rejected credentials");
        if (outcome.kind == PostOutcome::Kind::transient)
            throw error(errc::image_unavailable, image_ref);
        payload = outcome.body;
        json parsed = json::parse(payload, nullptr, false);
        if (parsed.is_discarded()) throw error(errc::malformed_response, image_ref);
        cache.put(key, payload);
    }
    auto loaded = speedtest::load_ocr_document(payload);
    if (warnings)
        warnings->insert(warnings->end(), loaded.warnings.begin(), loaded.warnings.end());
    return loaded.doc;
}

FixtureSentimentProvider::FixtureSentimentProvider(std::filesystem::path dir)
    : store_(std::move(dir)) {}

sentiment::SentimentScore FixtureSentimentProvider::score(const std::string& text) {
    auto key = sentiment_cache_key(text);
    auto hit = store_.get(key);
    if (!hit) throw error(errc::fixture_miss, key);
    json entry = json::parse(*hit, nullptr, false);
    if (entry.is_discarded() || !entry.contains("payload"))
        throw error(errc::malformed_response, key);
    std::vector<std::string> warnings;
    return map_score(entry["payload"], warnings);
}

FixtureOcrProvider::FixtureOcrProvider(std::filesystem::path dir) : store_(std::move(dir)) {}

speedtest::OcrDocument FixtureOcrProvider::fetch(const std::string& image_ref) {
    auto key = ocr_cache_key(image_ref);
    auto hit = store_.get(key);
    if (!hit) throw error(errc::fixture_miss, key);
    return speedtest::load_ocr_document(*hit).doc;
}

}  // namespace netlens::clients
