#include "netlens/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "netlens/clients.hpp"
#include "netlens/corpus.hpp"
#include "netlens/errors.hpp"
#include "netlens/outage.hpp"
#include "netlens/peaks.hpp"
#include "netlens/popularity.hpp"
#include "netlens/sentiment.hpp"
#include "netlens/textmine.hpp"
#include "netlens/trends.hpp"
#include "netlens/util.hpp"

namespace netlens::pipeline {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "netlens 0.1.0";

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key))
            throw error(errc::config_error, "unknown field '" + key + "' in " + where);
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) return {};
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& file) try {
    json j = json::parse(read_file(file), nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw error(errc::config_error, file.string() + " is not a JSON object");
    auto base = file.has_parent_path() ? file.parent_path() : std::filesystem::path(".");

    reject_unknown_keys(j,
                        {"posts", "comments", "window", "stopwords", "keyword_library", "brand",
                         "sentiment", "peaks", "outage", "popularity", "speedtest", "trends",
                         "out", "seed"},
                        "config");

    RunConfig cfg;
    if (!j.contains("posts") || !j.contains("comments"))
        throw error(errc::config_error, "posts and comments paths are required");
    cfg.posts_path = resolve(base, j["posts"].get<std::string>());
    cfg.comments_path = resolve(base, j["comments"].get<std::string>());

    if (!j.contains("window") || !j["window"].is_object())
        throw error(errc::config_error, "window {start,end} is required");
    reject_unknown_keys(j["window"], {"start", "end"}, "window");
    cfg.window_start = parse_iso_date(j["window"].value("start", std::string{}));
    cfg.window_end = parse_iso_date(j["window"].value("end", std::string{}));
    if (!(cfg.window_start < cfg.window_end))
        throw error(errc::config_error, "window start must precede end");

    cfg.stopwords_path = resolve(base, j.value("stopwords", std::string{}));
    cfg.keyword_library_path = resolve(base, j.value("keyword_library", std::string{}));
    cfg.brand = j.value("brand", std::string{"Starlink"});

    if (j.contains("sentiment")) {
        const auto& s = j["sentiment"];
        reject_unknown_keys(s,
                            {"provider", "lexicon", "tau", "peaks_include_comments", "endpoint",
                             "credential_env", "rate_per_sec", "max_retries", "backoff_base_ms",
                             "cache_dir"},
                            "sentiment");
        cfg.sentiment.provider = s.value("provider", std::string{"lexicon"});
        cfg.sentiment.lexicon_path = resolve(base, s.value("lexicon", std::string{}));
        cfg.sentiment.tau = s.value("tau", 0.7);
        cfg.sentiment.peaks_include_comments = s.value("peaks_include_comments", false);
        cfg.sentiment.endpoint = s.value("endpoint", std::string{});
        cfg.sentiment.credential_env = s.value("credential_env", std::string{});
        cfg.sentiment.rate_per_sec = s.value("rate_per_sec", 4.0);
        cfg.sentiment.max_retries = s.value("max_retries", 3);
        cfg.sentiment.backoff_base_ms = s.value("backoff_base_ms", 200);
        cfg.sentiment.cache_dir = resolve(base, s.value("cache_dir", std::string{}));
    }
    if (!(cfg.sentiment.tau > 0.5) || !(cfg.sentiment.tau <= 1.0))
        throw error(errc::config_error, "tau must be in (0.5, 1]");

    if (j.contains("peaks")) {
        const auto& p = j["peaks"];
        reject_unknown_keys(p, {"k", "min_separation_days", "cloud_k"}, "peaks");
        cfg.peaks.k = p.value("k", std::size_t{3});
        cfg.peaks.min_separation_days = p.value("min_separation_days", 2);
        cfg.peaks.cloud_k = p.value("cloud_k", std::size_t{10});
    }
    if (j.contains("outage")) {
        const auto& o = j["outage"];
        reject_unknown_keys(o, {"window_days", "z", "min_count", "strong_only", "mine_top_m"},
                            "outage");
        cfg.outage.window_days = o.value("window_days", 28);
        cfg.outage.z = o.value("z", 3.0);
        cfg.outage.min_count = o.value("min_count", std::size_t{5});
        cfg.outage.strong_only = o.value("strong_only", false);
        cfg.outage.mine_top_m = o.value("mine_top_m", std::size_t{30});
    }
    if (j.contains("popularity")) {
        const auto& p = j["popularity"];
        reject_unknown_keys(p, {"percentile", "report_top_k"}, "popularity");
        cfg.popularity.percentile = p.value("percentile", 99.0);
        cfg.popularity.report_top_k = p.value("report_top_k", std::size_t{10});
    }
    if (j.contains("speedtest")) {
        const auto& s = j["speedtest"];
        reject_unknown_keys(s, {"ocr_dir", "provider_filter", "isp", "bounds"}, "speedtest");
        cfg.speedtest.ocr_dir = resolve(base, s.value("ocr_dir", std::string{}));
        cfg.speedtest.provider_filter = s.value("provider_filter", true);
        cfg.speedtest.isp = s.value("isp", std::string{"starlink"});
        if (s.contains("bounds")) {
            const auto& b = s["bounds"];
            reject_unknown_keys(b,
                                {"download_min_mbps", "download_max_mbps", "upload_min_mbps",
                                 "upload_max_mbps", "latency_min_ms", "latency_max_ms"},
                                "bounds");
            cfg.speedtest.bounds.download_min_mbps = b.value("download_min_mbps", 0.1);
            cfg.speedtest.bounds.download_max_mbps = b.value("download_max_mbps", 2000.0);
            cfg.speedtest.bounds.upload_min_mbps = b.value("upload_min_mbps", 0.1);
            cfg.speedtest.bounds.upload_max_mbps = b.value("upload_max_mbps", 500.0);
            cfg.speedtest.bounds.latency_min_ms = b.value("latency_min_ms", 1.0);
            cfg.speedtest.bounds.latency_max_ms = b.value("latency_max_ms", 5000.0);
        }
    }
    if (j.contains("trends")) {
        const auto& t = j["trends"];
        reject_unknown_keys(t, {"fractions", "launches", "users", "svg"}, "trends");
        if (t.contains("fractions")) {
            cfg.trends.fractions.clear();
            for (const auto& f : t["fractions"]) cfg.trends.fractions.push_back(f.get<double>());
        }
        cfg.trends.launches_path = resolve(base, t.value("launches", std::string{}));
        cfg.trends.users_path = resolve(base, t.value("users", std::string{}));
        cfg.trends.svg = t.value("svg", true);
    }
    cfg.out_dir = resolve(base, j.value("out", std::string{"out"}));
    cfg.seed = j.value("seed", std::uint64_t{42});
    return cfg;
} catch (const json::exception& e) {
    throw error(errc::config_error, std::string("config: ") + e.what());
}

std::string run_config_json(const RunConfig& c) {
    json j;
    j["posts"] = c.posts_path.string();
    j["comments"] = c.comments_path.string();
    j["window"] = {{"start", to_iso_date(c.window_start)}, {"end", to_iso_date(c.window_end)}};
    j["stopwords"] = c.stopwords_path.string();
    j["keyword_library"] = c.keyword_library_path.string();
    j["brand"] = c.brand;
    j["sentiment"] = {{"provider", c.sentiment.provider},
                      {"lexicon", c.sentiment.lexicon_path.string()},
                      {"tau", c.sentiment.tau},
                      {"peaks_include_comments", c.sentiment.peaks_include_comments},
                      {"endpoint", c.sentiment.endpoint},
                      {"credential_env", c.sentiment.credential_env},
                      {"rate_per_sec", c.sentiment.rate_per_sec},
                      {"max_retries", c.sentiment.max_retries},
                      {"backoff_base_ms", c.sentiment.backoff_base_ms},
                      {"cache_dir", c.sentiment.cache_dir.string()}};
    j["peaks"] = {{"k", c.peaks.k},
                  {"min_separation_days", c.peaks.min_separation_days},
                  {"cloud_k", c.peaks.cloud_k}};
    j["outage"] = {{"window_days", c.outage.window_days},
                   {"z", c.outage.z},
                   {"min_count", c.outage.min_count},
                   {"strong_only", c.outage.strong_only},
                   {"mine_top_m", c.outage.mine_top_m}};
    j["popularity"] = {{"percentile", c.popularity.percentile},
                       {"report_top_k", c.popularity.report_top_k}};
    j["speedtest"] = {{"ocr_dir", c.speedtest.ocr_dir.string()},
                      {"provider_filter", c.speedtest.provider_filter},
                      {"isp", c.speedtest.isp},
                      {"bounds",
                       {{"download_min_mbps", c.speedtest.bounds.download_min_mbps},
                        {"download_max_mbps", c.speedtest.bounds.download_max_mbps},
                        {"upload_min_mbps", c.speedtest.bounds.upload_min_mbps},
                        {"upload_max_mbps", c.speedtest.bounds.upload_max_mbps},
                        {"latency_min_ms", c.speedtest.bounds.latency_min_ms},
                        {"latency_max_ms", c.speedtest.bounds.latency_max_ms}}}};
    j["trends"] = {{"fractions", c.trends.fractions},
                   {"launches", c.trends.launches_path.string()},
                   {"users", c.trends.users_path.string()},
                   {"svg", c.trends.svg}};
    j["out"] = c.out_dir.string();
    j["seed"] = c.seed;
    return j.dump(2) + "\n";
}

namespace {

/// Wraps any provider with a content-hash cache so re-runs score for free.
class CachingProvider : public sentiment::Provider {
public:
    CachingProvider(std::unique_ptr<sentiment::Provider> inner, std::filesystem::path dir)
        : inner_(std::move(inner)), store_(std::move(dir)) {}

    std::string id() const override { return inner_->id() + "+cache"; }

    sentiment::SentimentScore score(const std::string& text) override {
        auto key = clients::sentiment_cache_key(text);
        if (auto hit = store_.get(key)) {
            json entry = json::parse(*hit, nullptr, false);
            if (!entry.is_discarded() && entry.contains("payload")) {
                const auto& p = entry["payload"];
                return {p.value("positive", 0.0), p.value("negative", 0.0),
                        p.value("neutral", 1.0)};
            }
        }
        auto score = inner_->score(text);
        json entry;
        entry["input_hash"] = key;
        entry["provider"] = inner_->id();
        entry["payload"] = {{"positive", score.positive},
                            {"negative", score.negative},
                            {"neutral", score.neutral}};
        store_.put(key, entry.dump(2));
        return score;
    }

private:
    std::unique_ptr<sentiment::Provider> inner_;
    clients::CacheStore store_;
};

class RemoteProvider : public sentiment::Provider {
public:
    explicit RemoteProvider(const SentimentSettings& s) {
        config_.endpoint = s.endpoint;
        config_.credential_env = s.credential_env;
        config_.max_requests_per_second = s.rate_per_sec;
        config_.max_retries = s.max_retries;
        config_.backoff_base_ms = s.backoff_base_ms;
        config_.cache_dir = s.cache_dir.empty() ? std::filesystem::temp_directory_path() / "netlens-cache"
                                                : s.cache_dir;
        transport_ = clients::http_transport();
    }

    std::string id() const override { return "remote"; }

    sentiment::SentimentScore score(const std::string& text) override {
        auto result = clients::remote_sentiment({text}, config_, transport_, clock_);
        if (!result.scores[0])
            throw error(errc::provider_error, "remote scoring failed");
        return *result.scores[0];
    }

private:
    clients::ProviderConfig config_;
    clients::Transport transport_;
    clients::SystemClock clock_;
};

struct ItemError {
    std::string stage;
    std::string item;
    std::string message;
};

struct Context {
    const RunConfig& cfg;
    std::vector<std::string> artifacts;
    std::vector<ItemError> errors;

    // ingest
    std::vector<corpus::Post> posts;
    std::vector<corpus::Comment> comments;
    corpus::CleanSummary clean_summary;
    corpus::ThreadForest forest;
    std::size_t ingest_error_count = 0;
    std::size_t out_of_window = 0;
    textmine::StopwordSet stopwords;

    // sentiment
    std::unique_ptr<sentiment::Provider> provider;
    std::unordered_map<std::string, sentiment::SentimentScore> scores;  // by item id
    std::unordered_map<std::string, sentiment::StrongLabel> labels;

    // speedtest
    std::vector<speedtest::SpeedTestReport> kept_reports;
    std::unordered_map<std::string, const corpus::Post*> post_by_media;

    explicit Context(const RunConfig& c) : cfg(c) {}
};

void emit(Context& ctx, const std::string& name, const std::string& content) {
    write_file(ctx.cfg.out_dir / name, content);
    ctx.artifacts.push_back(name);
}

std::string post_text(const corpus::Post& p) { return p.title + ' ' + p.body; }

void stage_ingest(Context& ctx) {
    std::ifstream posts_in(ctx.cfg.posts_path);
    if (!posts_in) throw error(errc::config_error, "missing posts file " + ctx.cfg.posts_path.string());
    std::ifstream comments_in(ctx.cfg.comments_path);
    if (!comments_in)
        throw error(errc::config_error, "missing comments file " + ctx.cfg.comments_path.string());

    auto loaded_posts = corpus::load_posts(posts_in);
    auto loaded_comments = corpus::load_comments(comments_in);
    ctx.ingest_error_count = loaded_posts.errors.size() + loaded_comments.errors.size();
    for (const auto& e : loaded_posts.errors)
        ctx.errors.push_back({"ingest", "posts:" + std::to_string(e.line), e.detail});
    for (const auto& e : loaded_comments.errors)
        ctx.errors.push_back({"ingest", "comments:" + std::to_string(e.line), e.detail});

    ctx.posts = std::move(loaded_posts.posts);
    ctx.comments = std::move(loaded_comments.comments);
    ctx.clean_summary = corpus::clean(ctx.posts, ctx.comments);

    auto in_window = [&](std::int64_t ts) {
        Date d = date_from_epoch_seconds(ts);
        return ctx.cfg.window_start <= d && d <= ctx.cfg.window_end;
    };
    std::erase_if(ctx.posts, [&](const corpus::Post& p) {
        bool drop = !in_window(p.created_utc);
        ctx.out_of_window += drop;
        return drop;
    });
    std::erase_if(ctx.comments, [&](const corpus::Comment& c) {
        bool drop = !in_window(c.created_utc);
        ctx.out_of_window += drop;
        return drop;
    });

    ctx.forest = corpus::build_threads(ctx.posts, ctx.comments);
    if (!ctx.cfg.stopwords_path.empty())
        ctx.stopwords = textmine::load_stopwords(ctx.cfg.stopwords_path);

    for (const auto& p : ctx.posts)
        for (const auto& m : p.media_refs) ctx.post_by_media.emplace(m, &p);

    emit(ctx, "posts_clean.ndjson", corpus::serialize_posts(ctx.posts));
    emit(ctx, "comments_clean.ndjson", corpus::serialize_comments(ctx.comments));
    emit(ctx, "weekly_activity.csv", corpus::weekly_activity_csv(corpus::weekly_activity(ctx.posts)));

    std::size_t orphans = 0;
    for (const auto& t : ctx.forest.threads) orphans += t.orphan_comments.size();
    json summary;
    summary["posts"] = ctx.posts.size();
    summary["comments"] = ctx.comments.size();
    summary["ingest_errors"] = ctx.ingest_error_count;
    summary["removed_posts"] = ctx.clean_summary.removed_posts;
    summary["removed_comments"] = ctx.clean_summary.removed_comments;
    summary["stripped_authors"] = ctx.clean_summary.stripped_authors;
    summary["negative_upvote_items"] = ctx.clean_summary.negative_upvote_ids.size();
    summary["out_of_window"] = ctx.out_of_window;
    summary["threads"] = ctx.forest.threads.size();
    summary["orphan_comments"] = orphans;
    summary["unattached_comments"] = ctx.forest.unattached.size();
    emit(ctx, "ingest_summary.json", summary.dump(2) + "\n");
}

std::unique_ptr<sentiment::Provider> make_provider(const RunConfig& cfg) {
    const auto& s = cfg.sentiment;
    std::unique_ptr<sentiment::Provider> provider;
    if (s.provider == "lexicon") {
        if (s.lexicon_path.empty())
            throw error(errc::config_error, "lexicon provider needs a lexicon path");
        provider = std::make_unique<sentiment::LexiconProvider>(
            sentiment::load_lexicon(s.lexicon_path).lexicon);
    } else if (s.provider == "fixture") {
        if (s.cache_dir.empty())
            throw error(errc::config_error, "fixture provider needs cache_dir");
        return std::make_unique<clients::FixtureSentimentProvider>(s.cache_dir);
    } else if (s.provider == "remote") {
        if (s.endpoint.empty()) throw error(errc::config_error, "remote provider needs endpoint");
        provider = std::make_unique<RemoteProvider>(s);
    } else {
        throw error(errc::config_error, "unknown sentiment provider '" + s.provider + "'");
    }
    if (!s.cache_dir.empty() && s.provider != "fixture")
        provider = std::make_unique<CachingProvider>(std::move(provider), s.cache_dir);
    return provider;
}

void stage_sentiment(Context& ctx) {
    ctx.provider = make_provider(ctx.cfg);

    std::vector<std::string> texts;
    std::vector<std::pair<std::string, bool>> ids;  // id, is_post
    texts.reserve(ctx.posts.size() + ctx.comments.size());
    for (const auto& p : ctx.posts) {
        texts.push_back(post_text(p));
        ids.emplace_back(p.id, true);
    }
    for (const auto& c : ctx.comments) {
        texts.push_back(c.body);
        ids.emplace_back(c.id, false);
    }

    auto batch = sentiment::score_batch(texts, *ctx.provider);
    for (const auto& e : batch.errors)
        ctx.errors.push_back({"sentiment", ids[e.index].first, e.message});

    struct Row {
        std::string kind, id, hash;
        sentiment::SentimentScore score;
        sentiment::StrongLabel label;
    };
    std::vector<Row> rows;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (!batch.scores[i]) continue;  // failed items stay out of all counts
        const auto& score = *batch.scores[i];
        auto label = sentiment::classify_strong(score, ctx.cfg.sentiment.tau);
        ctx.scores.emplace(ids[i].first, score);
        ctx.labels.emplace(ids[i].first, label);
        rows.push_back({ids[i].second ? "post" : "comment", ids[i].first,
                        clients::sentiment_cache_key(texts[i]), score, label});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.kind != b.kind) return a.kind > b.kind;  // posts first
        return a.id < b.id;
    });
    std::string csv = "kind,id,content_hash,positive,negative,neutral,label\n";
    for (const auto& r : rows) {
        csv += r.kind + ',' + csv_escape(r.id) + ',' + r.hash + ',' + format_double(r.score.positive) +
               ',' + format_double(r.score.negative) + ',' + format_double(r.score.neutral) + ',' +
               sentiment::strong_label_name(r.label) + '\n';
    }
    emit(ctx, "scored.csv", csv);
}

class CorpusDayTexts : public peaks::DayTexts {
public:
    explicit CorpusDayTexts(const Context& ctx) : ctx_(ctx) {}

    std::vector<std::string> texts_on(Date d) const override {
        std::vector<std::string> out;
        for (const auto& p : ctx_.posts)
            if (date_from_epoch_seconds(p.created_utc) == d) out.push_back(post_text(p));
        for (const auto& c : ctx_.comments)
            if (date_from_epoch_seconds(c.created_utc) == d) out.push_back(c.body);
        return out;
    }

private:
    const Context& ctx_;
};

void stage_peaks(Context& ctx) {
    std::vector<peaks::LabeledDay> items;
    auto add = [&](const std::string& id, std::int64_t ts) {
        auto it = ctx.labels.find(id);
        if (it == ctx.labels.end()) return;
        items.push_back({date_from_epoch_seconds(ts), it->second});
    };
    for (const auto& p : ctx.posts) add(p.id, p.created_utc);
    if (ctx.cfg.sentiment.peaks_include_comments)
        for (const auto& c : ctx.comments) add(c.id, c.created_utc);

    auto series = peaks::daily_strong_counts(ctx.cfg.window_start, ctx.cfg.window_end, items);
    auto top = peaks::top_peaks(series, ctx.cfg.peaks.k, ctx.cfg.peaks.min_separation_days);
    CorpusDayTexts day_texts(ctx);
    top = peaks::annotate_peaks(std::move(top), day_texts, ctx.stopwords, ctx.cfg.brand,
                                ctx.cfg.peaks.cloud_k);

    emit(ctx, "daily_sentiment.csv", peaks::daily_series_csv(series));
    emit(ctx, "peaks.json", peaks::peaks_json(top));
}

void stage_outages(Context& ctx) {
    if (ctx.cfg.keyword_library_path.empty())
        throw error(errc::config_error, "outage detection needs keyword_library");
    auto lib = outage::load_library(ctx.cfg.keyword_library_path, ctx.stopwords);
    for (const auto& w : lib.warnings) ctx.errors.push_back({"outages", "library", w});

    outage::ScoreLookup lookup = [&](const std::string& id) -> const sentiment::SentimentScore* {
        auto it = ctx.scores.find(id);
        return it == ctx.scores.end() ? nullptr : &it->second;
    };
    auto mode = ctx.cfg.outage.strong_only ? outage::QualifyMode::strong_negative_only
                                           : outage::QualifyMode::negative_over_positive;
    auto qualified = outage::qualify_threads(ctx.forest.threads, lib.library, lookup,
                                             ctx.stopwords, mode, ctx.cfg.sentiment.tau);
    auto series =
        outage::keyword_day_series(qualified, ctx.cfg.window_start, ctx.cfg.window_end);
    outage::SpikeParams params;
    params.window_days = ctx.cfg.outage.window_days;
    params.z = ctx.cfg.outage.z;
    params.min_count = ctx.cfg.outage.min_count;
    series = outage::flag_spikes(std::move(series), params);
    emit(ctx, "outage_series.csv", outage::outage_series_csv(series));

    // Candidate mining seeded from the flagged days, for human review.
    std::set<Date> flagged_days;
    for (std::size_t i = 0; i < series.span(); ++i)
        if (series.flagged[i]) flagged_days.insert(add_days(series.start, static_cast<int>(i)));

    std::unordered_map<std::string, const std::string*> text_by_id;
    std::vector<textmine::TokenStream> corpus_docs;
    std::vector<std::string> post_texts;
    post_texts.reserve(ctx.posts.size());
    for (const auto& p : ctx.posts) post_texts.push_back(post_text(p));
    for (std::size_t i = 0; i < ctx.posts.size(); ++i) {
        text_by_id.emplace(ctx.posts[i].id, &post_texts[i]);
        corpus_docs.push_back(textmine::tokenize_filter(post_texts[i], ctx.stopwords));
    }
    for (const auto& c : ctx.comments) {
        text_by_id.emplace(c.id, &c.body);
        corpus_docs.push_back(textmine::tokenize_filter(c.body, ctx.stopwords));
    }

    std::vector<textmine::TokenStream> seed_docs;
    for (const auto& thread : qualified)
        for (const auto& item : thread.items)
            if (flagged_days.count(item.day))
                if (auto it = text_by_id.find(item.item_id); it != text_by_id.end())
                    seed_docs.push_back(textmine::tokenize_filter(*it->second, ctx.stopwords));

    std::string mined_csv = "term,kind,lift,seed_count,corpus_count\n";
    if (!seed_docs.empty()) {
        auto mined = outage::mine_keywords(seed_docs, corpus_docs, ctx.cfg.outage.mine_top_m);
        for (const auto& k : mined.unigrams)
            mined_csv += csv_escape(k.term) + ",unigram," + format_double(k.lift) + ',' +
                         std::to_string(k.seed_count) + ',' + std::to_string(k.corpus_count) + '\n';
        for (const auto& k : mined.bigrams)
            mined_csv += csv_escape(k.term) + ",bigram," + format_double(k.lift) + ',' +
                         std::to_string(k.seed_count) + ',' + std::to_string(k.corpus_count) + '\n';
    }
    emit(ctx, "mined_keywords.csv", mined_csv);
}

void stage_popular(Context& ctx) {
    std::map<Month, std::vector<const corpus::Post*>> by_month;
    for (const auto& p : ctx.posts)
        by_month[month_of(date_from_epoch_seconds(p.created_utc))].push_back(&p);

    std::unordered_map<std::string, const corpus::Thread*> thread_by_post;
    for (const auto& t : ctx.forest.threads) thread_by_post.emplace(t.root.id, &t);

    popularity::Scorer scorer = [&](const std::string& text) { return ctx.provider->score(text); };

    std::vector<popularity::MonthlyPopularity> months;
    std::vector<std::vector<popularity::TopicReport>> reports;
    for (const auto& [month, posts] : by_month) {
        auto pop = popularity::popular_posts(month, posts, ctx.cfg.popularity.percentile);
        std::vector<popularity::TopicReport> month_reports;
        for (const auto& id : pop.popular) {
            auto it = thread_by_post.find(id);
            if (it == thread_by_post.end()) continue;
            month_reports.push_back(popularity::topic_report(*it->second, ctx.stopwords, scorer,
                                                             ctx.cfg.sentiment.tau,
                                                             ctx.cfg.popularity.report_top_k));
        }
        months.push_back(std::move(pop));
        reports.push_back(std::move(month_reports));
    }
    emit(ctx, "popular.json", popularity::monthly_popularity_json(months, reports));
}

void stage_speedtest(Context& ctx) {
    if (ctx.cfg.speedtest.ocr_dir.empty())
        throw error(errc::config_error, "speedtest needs ocr_dir");
    if (!std::filesystem::is_directory(ctx.cfg.speedtest.ocr_dir))
        throw error(errc::config_error,
                    "ocr_dir " + ctx.cfg.speedtest.ocr_dir.string() + " is not a directory");

    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(ctx.cfg.speedtest.ocr_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    auto spec = speedtest::default_label_spec();
    speedtest::ExtractionWarnings warnings;
    std::vector<speedtest::SpeedTestReport> extracted;
    for (const auto& file : files) {
        try {
            auto loaded = speedtest::load_ocr_document(read_file(file));
            for (auto& w : loaded.warnings) warnings.notes.push_back(loaded.doc.source_id + ": " + w);
            auto layout = speedtest::classify_template(loaded.doc, spec);
            if (layout == speedtest::Template::table) {
                auto reports = speedtest::extract_table(loaded.doc, spec, &warnings);
                extracted.insert(extracted.end(), reports.begin(), reports.end());
            } else {
                extracted.push_back(speedtest::extract_simple(loaded.doc, spec, &warnings));
            }
        } catch (const std::exception& e) {
            ctx.errors.push_back({"speedtest", file.filename().string(), e.what()});
        }
    }

    speedtest::ProviderFilter filter;
    filter.enabled = ctx.cfg.speedtest.provider_filter;
    filter.isp = ctx.cfg.speedtest.isp;
    for (const auto& [media, post] : ctx.post_by_media)
        filter.post_text_by_source.emplace(media, post_text(*post));

    auto filtered =
        speedtest::filter_false_positives(std::move(extracted), ctx.cfg.speedtest.bounds, filter);
    ctx.kept_reports = std::move(filtered.kept);

    emit(ctx, "speedtest_reports.csv", speedtest::reports_csv(ctx.kept_reports));
    std::string rejected_csv = "source_id,row,reason\n";
    for (const auto& r : filtered.rejected) {
        rejected_csv += csv_escape(r.report.source_id) + ',';
        if (r.report.table_row) rejected_csv += std::to_string(*r.report.table_row);
        rejected_csv += ',' + csv_escape(r.reason) + '\n';
    }
    emit(ctx, "speedtest_rejected.csv", rejected_csv);
    std::string warn_csv = "note\n";
    for (const auto& n : warnings.notes) warn_csv += csv_escape(n) + '\n';
    emit(ctx, "speedtest_warnings.csv", warn_csv);
}

void stage_trends(Context& ctx) {
    Month start = month_of(ctx.cfg.window_start);
    Month end = month_of(ctx.cfg.window_end);

    std::vector<trends::DatedReport> dated;
    std::map<Month, std::vector<double>> month_values;
    std::set<std::string> sharing_posts;  // post ids with a kept report
    for (const auto& report : ctx.kept_reports) {
        trends::DatedReport dr{report, 0};
        auto post_it = ctx.post_by_media.find(report.source_id);
        if (post_it != ctx.post_by_media.end()) {
            dr.fallback_timestamp = post_it->second->created_utc;
            sharing_posts.insert(post_it->second->id);
        } else if (!report.test_timestamp) {
            ctx.errors.push_back(
                {"trends", report.source_id, "report has neither timestamp nor originating post"});
            continue;
        }
        dated.push_back(std::move(dr));
    }
    auto series = trends::monthly_median_series(dated, start, end);

    for (const auto& dr : dated) {
        std::int64_t ts = dr.report.test_timestamp.value_or(dr.fallback_timestamp);
        Month m = month_of(date_from_epoch_seconds(ts));
        if (start <= m && m <= end) {
            auto unit = dr.report.download.unit;
            double mbps = dr.report.download.value;
            if (unit == "kbps") mbps /= 1000.0;
            if (unit == "gbps") mbps *= 1000.0;
            month_values[m].push_back(mbps);
        }
    }
    for (auto& point : series) {
        auto it = month_values.find(point.month);
        if (it == month_values.end()) continue;
        point.subsample_medians = trends::subsample_medians(
            it->second, ctx.cfg.trends.fractions,
            ctx.cfg.seed ^ fnv1a64("month:" + to_iso_month(point.month)));
    }

    // Pos is scoped to posts that shared a kept speed-test report.
    std::map<Month, std::vector<sentiment::StrongLabel>> month_labels;
    for (const auto& p : ctx.posts) {
        if (!sharing_posts.count(p.id)) continue;
        auto it = ctx.labels.find(p.id);
        if (it == ctx.labels.end()) continue;
        month_labels[month_of(date_from_epoch_seconds(p.created_utc))].push_back(it->second);
    }
    for (auto& point : series) {
        auto it = month_labels.find(point.month);
        if (it == month_labels.end()) continue;
        auto ps = sentiment::pos_score(point.month, it->second);
        point.pos = ps.pos;
        point.strong_pos = ps.strong_pos;
        point.strong_neg = ps.strong_neg;
    }

    trends::AnnotationTable tables;
    if (!ctx.cfg.trends.launches_path.empty())
        tables = trends::load_launches(read_file(ctx.cfg.trends.launches_path), std::move(tables));
    if (!ctx.cfg.trends.users_path.empty())
        tables = trends::load_users(read_file(ctx.cfg.trends.users_path), std::move(tables));
    series = trends::join_annotations(std::move(series), tables);

    emit(ctx, "trends.csv", trends::trend_csv(series, ctx.cfg.trends.fractions));
    if (ctx.cfg.trends.svg) emit(ctx, "trends.svg", trends::trend_svg(series));
}

std::string hash_file(const std::filesystem::path& p) {
    return hex64(fnv1a64(read_file(p)));
}

void write_manifest(Context& ctx, const std::string& command) {
    json inputs;
    auto add_input = [&](const char* name, const std::filesystem::path& p) {
        if (!p.empty() && std::filesystem::is_regular_file(p)) inputs[name] = hash_file(p);
    };
    add_input("posts", ctx.cfg.posts_path);
    add_input("comments", ctx.cfg.comments_path);
    add_input("stopwords", ctx.cfg.stopwords_path);
    add_input("lexicon", ctx.cfg.sentiment.lexicon_path);
    add_input("keyword_library", ctx.cfg.keyword_library_path);
    add_input("launches", ctx.cfg.trends.launches_path);
    add_input("users", ctx.cfg.trends.users_path);
    if (!ctx.cfg.speedtest.ocr_dir.empty() &&
        std::filesystem::is_directory(ctx.cfg.speedtest.ocr_dir)) {
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(ctx.cfg.speedtest.ocr_dir))
            if (entry.is_regular_file()) files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        std::string combined;
        for (const auto& f : files) combined += f.filename().string() + ':' + hash_file(f) + ';';
        inputs["ocr_dir"] = hex64(fnv1a64(combined));
    }

    auto now = std::chrono::duration_cast<std::chrono::seconds>(
                   std::chrono::system_clock::now().time_since_epoch())
                   .count();

    std::sort(ctx.artifacts.begin(), ctx.artifacts.end());
    json manifest;
    manifest["version"] = kVersion;
    manifest["command"] = command;
    manifest["config"] = json::parse(run_config_json(ctx.cfg));
    manifest["inputs"] = std::move(inputs);
    manifest["artifacts"] = ctx.artifacts;
    manifest["item_errors"] = ctx.errors.size();
    manifest["generated_at"] = to_iso_datetime(now);
    write_file(ctx.cfg.out_dir / "manifest.json", manifest.dump(2) + "\n");
    ctx.artifacts.push_back("manifest.json");
}

}  // namespace

RunResult run(const std::string& command, const RunConfig& config) {
    static const std::map<std::string, std::vector<std::string>> plans{
        {"ingest", {"ingest"}},
        {"sentiment", {"ingest", "sentiment"}},
        {"peaks", {"ingest", "sentiment", "peaks"}},
        {"outages", {"ingest", "sentiment", "outages"}},
        {"popular", {"ingest", "sentiment", "popular"}},
        {"speedtest", {"ingest", "speedtest"}},
        {"trends", {"ingest", "sentiment", "speedtest", "trends"}},
        {"report",
         {"ingest", "sentiment", "peaks", "outages", "popular", "speedtest", "trends"}},
    };
    auto plan = plans.find(command);
    if (plan == plans.end()) throw error(errc::config_error, "unknown command '" + command + "'");

    Context ctx(config);
    std::filesystem::create_directories(config.out_dir);
    for (const auto& stage : plan->second) {
        if (stage == "ingest") stage_ingest(ctx);
        else if (stage == "sentiment") stage_sentiment(ctx);
        else if (stage == "peaks") stage_peaks(ctx);
        else if (stage == "outages") stage_outages(ctx);
        else if (stage == "popular") stage_popular(ctx);
        else if (stage == "speedtest") stage_speedtest(ctx);
        else if (stage == "trends") stage_trends(ctx);
    }

    std::string errors_csv = "stage,item,message\n";
    for (const auto& e : ctx.errors)
        errors_csv += e.stage + ',' + csv_escape(e.item) + ',' + csv_escape(e.message) + '\n';
    emit(ctx, "errors.csv", errors_csv);

    write_manifest(ctx, command);

    RunResult result;
    result.item_errors = ctx.errors.size();
    result.exit_code = ctx.errors.empty() ? 0 : 1;
    result.artifacts = ctx.artifacts;
    return result;
}

}  // namespace netlens::pipeline
