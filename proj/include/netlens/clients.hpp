#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "netlens/sentiment.hpp"
#include "netlens/speedtest.hpp"

namespace netlens::clients {

struct ProviderConfig {
    std::string endpoint;
    std::string credential_env;  // env var name; the value is read per call
                                 // and never persisted
    double max_requests_per_second = 4.0;
    int max_retries = 3;
    int backoff_base_ms = 200;
    std::filesystem::path cache_dir;
    std::size_t batch_size = 10;
};

/// Injection point for time so rate-limit tests never sleep for real.
class Clock {
public:
    virtual ~Clock() = default;
    virtual std::int64_t now_ms() = 0;
    virtual void sleep_ms(std::int64_t ms) = 0;
};

class SystemClock : public Clock {
public:
    std::int64_t now_ms() override;
    void sleep_ms(std::int64_t ms) override;
};

class VirtualClock : public Clock {
public:
    explicit VirtualClock(std::int64_t start_ms = 0) : now_(start_ms) {}
    std::int64_t now_ms() override { return now_; }
    void sleep_ms(std::int64_t ms) override { now_ += ms; }

private:
    std::int64_t now_;
};

/// Serializes calls so no 1-second window sees more than the configured rate.
class RateLimiter {
public:
    RateLimiter(double per_second, Clock& clock);
    void acquire();

private:
    double interval_ms_;
    Clock& clock_;
    std::int64_t next_allowed_ms_ = 0;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// POSTs a JSON body; empty optional means the request never completed
/// (network failure), which is retried as transient.
using Transport =
    std::function<std::optional<HttpResponse>(const std::string& url, const std::string& body,
                                              const std::string& auth_token)>;

/// Real transport backed by an HTTP client library.
Transport http_transport();

/// One file per entry, filename = content hash, JSON payload inside.
class CacheStore {
public:
    explicit CacheStore(std::filesystem::path dir);
    std::optional<std::string> get(const std::string& key) const;
    void put(const std::string& key, const std::string& payload) const;
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
};

std::string sentiment_cache_key(const std::string& text);
std::string ocr_cache_key(const std::string& image_ref);

struct RemoteSentimentResult {
    std::vector<std::optional<sentiment::SentimentScore>> scores;
    std::vector<std::size_t> failed_indices;
    std::vector<std::string> warnings;  // e.g. renormalized responses
    std::size_t network_calls = 0;
};

/// Cache-first batch scoring against a remote endpoint. Auth failures abort
/// (never retried); transient failures retry with exponential backoff and
/// exhaust into per-item failures. Responses renormalize to sum 1.
RemoteSentimentResult remote_sentiment(const std::vector<std::string>& texts,
                                       const ProviderConfig& config, const Transport& transport,
                                       Clock& clock);

/// Remote OCR for one image reference; cached by content hash.
speedtest::OcrDocument remote_ocr(const std::string& image_ref, const ProviderConfig& config,
                                  const Transport& transport, Clock& clock,
                                  std::vector<std::string>* warnings = nullptr);

/// Sentiment provider that serves exclusively from a fixture directory laid
/// out like the cache; any miss raises error(fixture_miss).
class FixtureSentimentProvider : public sentiment::Provider {
public:
    explicit FixtureSentimentProvider(std::filesystem::path dir);
    std::string id() const override { return "fixture"; }
    sentiment::SentimentScore score(const std::string& text) override;

private:
    CacheStore store_;
};

/// OCR provider over the same fixture layout.
class FixtureOcrProvider {
public:
    explicit FixtureOcrProvider(std::filesystem::path dir);
    speedtest::OcrDocument fetch(const std::string& image_ref);

private:
    CacheStore store_;
};

}  // namespace netlens::clients
