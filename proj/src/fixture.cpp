#include "netlens/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "netlens/errors.hpp"
#include "netlens/outage.hpp"
#include "netlens/peaks.hpp"
#include "netlens/popularity.hpp"
#include "netlens/rng.hpp"
#include "netlens/sentiment.hpp"
#include "netlens/textmine.hpp"
#include "netlens/trends.hpp"
#include "netlens/util.hpp"

namespace netlens::fixture {

namespace {

using nlohmann::json;

const std::vector<std::string> kPositivePool = {"love",      "great",     "amazing", "awesome",
                                                "perfect",   "excellent", "fantastic", "wonderful",
                                                "happy",     "impressed"};
const std::vector<std::string> kNegativePool = {"terrible",     "awful",  "horrible",
                                                "worst",        "useless", "broken",
                                                "disappointed", "frustrating", "angry", "unhappy"};
const std::vector<std::string> kFillerPool = {
    "dish",     "antenna", "router",   "mount",   "roof",     "tripod",  "ethernet",
    "adapter",  "snow",    "winter",   "trees",   "pole",     "install", "alignment",
    "bracket",  "mesh",    "bypass",   "heater",  "birds",    "fence",   "barn",
    "valley",   "ridge",   "firmware", "congestion", "obstruction", "beta", "kit",
    "neighbor", "gateway"};

struct PendingPost {
    json rec;
    std::size_t comments = 0;
};

struct Builder {
    const FixtureSpec& spec;
    const sentiment::Lexicon& lexicon;
    const textmine::StopwordSet& stopwords;
    const outage::KeywordLibrary& library;

    std::vector<PendingPost> posts;
    std::vector<json> comments;
    std::map<std::string, std::string> ocr_docs;  // filename -> json text
    std::unordered_map<std::string, std::size_t> post_index;  // id -> posts[]
    std::map<Date, std::vector<std::size_t>> base_posts_by_day;  // clean survivors

    // Realized ground truth, tallied as records are created.
    std::map<Date, std::size_t> strong_pos_by_day;
    std::map<Date, std::size_t> strong_neg_by_day;
    std::map<Date, std::size_t> outage_hits_by_day;
    std::map<Month, std::vector<double>> kept_downloads;
    std::map<Month, std::size_t> sharing_strong_pos;
    std::map<Month, std::size_t> sharing_strong_neg;

    std::size_t next_post = 0, next_comment = 0, next_media = 0;

    explicit Builder(const FixtureSpec& s, const sentiment::Lexicon& lex,
                     const textmine::StopwordSet& sw, const outage::KeywordLibrary& lib)
        : spec(s), lexicon(lex), stopwords(sw), library(lib) {}

    std::string post_id() {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "p%06zu", ++next_post);
        return buf;
    }
    std::string comment_id() {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "c%06zu", ++next_comment);
        return buf;
    }
    std::string media_id() {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "m%06zu", ++next_media);
        return buf;
    }

    sentiment::StrongLabel label_of(const std::string& text) {
        return sentiment::classify_strong(sentiment::score_text(text, lexicon), 0.7);
    }

    /// Every post runs through the real scorer so the realized daily series
    /// is exact, whatever the caller intended.
    std::string add_post(Date day, std::int64_t ts, const std::string& title,
                         const std::string& body, std::int64_t upvotes,
                         const std::string& author, const std::vector<std::string>& media = {}) {
        std::string id = post_id();
        json rec;
        rec["id"] = id;
        rec["created_utc"] = ts;
        rec["title"] = title;
        rec["selftext"] = body;
        rec["score"] = upvotes;
        rec["num_comments"] = 0;
        if (!author.empty()) rec["author"] = author;
        if (!media.empty()) rec["media_refs"] = media;
        post_index[id] = posts.size();
        posts.push_back({std::move(rec), 0});

        bool dropped = corpus::default_removal_sentinels().count(body) ||
                       corpus::default_removal_sentinels().count(title);
        if (!dropped) {
            auto label = label_of(title + ' ' + body);
            if (label == sentiment::StrongLabel::strong_pos) ++strong_pos_by_day[day];
            if (label == sentiment::StrongLabel::strong_neg) ++strong_neg_by_day[day];
            record_outage_hits(title + ' ' + body, day);
        }
        return id;
    }

    std::string add_comment(const std::string& post, const std::string& parent, Date day,
                            std::int64_t ts, const std::string& body, std::int64_t upvotes,
                            const std::string& author) {
        std::string id = comment_id();
        json rec;
        rec["id"] = id;
        rec["parent_id"] = parent;
        rec["link_id"] = post;
        rec["created_utc"] = ts;
        rec["body"] = body;
        rec["score"] = upvotes;
        if (!author.empty()) rec["author"] = author;
        comments.push_back(std::move(rec));
        auto it = post_index.find(post);
        if (it != post_index.end()) ++posts[it->second].comments;
        if (!corpus::default_removal_sentinels().count(body)) record_outage_hits(body, day);
        return id;
    }

    /// Counts hits only when the item would pass the step-2 sentiment filter,
    /// mirroring the detector.
    void record_outage_hits(const std::string& text, Date day) {
        auto score = sentiment::score_text(text, lexicon);
        if (!(score.negative > score.positive)) return;
        auto tokens = textmine::tokenize_filter(text, stopwords);
        std::size_t hits = outage::count_keyword_hits(tokens, library);
        if (hits > 0) outage_hits_by_day[day] += hits;
    }

    std::string pick(const std::vector<std::string>& pool, Rng& rng) {
        return pool[rng.below(pool.size())];
    }

    std::string fillers(std::size_t n, Rng& rng) {
        std::string out;
        for (std::size_t i = 0; i < n; ++i) {
            if (!out.empty()) out += ' ';
            out += pick(kFillerPool, rng);
        }
        return out;
    }

    /// Three distinct same-polarity terms: the minimum for a strong label.
    std::string strong_text(bool positive, Rng& rng) {
        const auto& pool = positive ? kPositivePool : kNegativePool;
        auto idx = sample_indices(pool.size(), 3, rng);
        std::string out = pool[idx[0]] + ' ' + pool[idx[1]] + ' ' + pool[idx[2]];
        out += ' ' + fillers(2, rng);
        return out;
    }
};

std::string format1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

double parse1(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

std::int64_t day_seconds(Date d, int hour, int minute, int second = 0) {
    return std::int64_t{d.days} * 86400 + hour * 3600 + minute * 60 + second;
}

}  // namespace

// --- OCR layout synthesis ---------------------------------------------------

namespace {

struct TokenPlan {
    std::string text;
    double x, y, w, h;
};

speedtest::OcrDocument realize_layout(const std::string& source, double width, double height,
                                      const std::vector<TokenPlan>& tokens, double jitter_frac,
                                      Rng& rng) {
    speedtest::OcrDocument doc;
    doc.source_id = source;
    doc.width = width;
    doc.height = height;
    for (const auto& t : tokens) {
        double jx = (rng.uniform() * 2 - 1) * jitter_frac * t.h;
        double jy = (rng.uniform() * 2 - 1) * jitter_frac * t.h;
        doc.tokens.push_back({t.text, t.x + jx, t.y + jy, t.w, t.h, 0.9 + rng.uniform() * 0.1});
    }
    return doc;
}

}  // namespace

speedtest::OcrDocument simple_ocr_doc(const std::string& source_id,
                                      const SimpleLayoutOptions& o, Rng& rng) {
    std::vector<TokenPlan> t;
    t.push_back({o.provider, 40, 30, 120, 24});
    t.push_back({"PING", 80, 140, 50, 20});
    if (o.latency_attached) {
        t.push_back({std::to_string(o.latency_ms) + "ms", 145, 140, 48, 20});
    } else {
        t.push_back({std::to_string(o.latency_ms), 145, 140, 26, 20});
        t.push_back({"ms", 178, 140, 26, 20});
    }
    t.push_back({"DOWNLOAD", 320, 140, 110, 20});
    t.push_back({"UPLOAD", 560, 140, 90, 20});
    if (o.attached_units) {
        t.push_back({o.download + "Mbps", 320, 200, 100, 24});
        t.push_back({o.upload + "Mbps", 560, 200, 90, 24});
    } else {
        t.push_back({o.download, 320, 200, 60, 24});
        t.push_back({"Mbps", 325, 232, 50, 18});
        t.push_back({o.upload, 560, 200, 55, 24});
        t.push_back({"Mbps", 565, 232, 50, 18});
    }
    if (o.with_date) t.push_back({to_iso_date(o.date), 80, 520, 96, 18});
    t.push_back({"Server", 80, 560, 58, 18});
    t.push_back({"Bellingham", 150, 560, 92, 18});
    return realize_layout(source_id, 800, 600, t, o.jitter_frac, rng);
}

speedtest::OcrDocument table_ocr_doc(const std::string& source_id,
                                     const TableLayoutOptions& o, Rng& rng) {
    // Columns: DATE | PING | DOWNLOAD | UPLOAD
    std::vector<TokenPlan> t;
    t.push_back({o.provider, 40, 30, 120, 24});
    t.push_back({"PING", 260, 120, 60, 20});
    t.push_back({"DOWNLOAD", 430, 120, 110, 20});
    t.push_back({"UPLOAD", 650, 120, 90, 20});
    if (o.with_dates) t.push_back({"DATE", 60, 120, 60, 20});
    double y = 180;
    for (const auto& row : o.rows) {
        if (o.with_dates) t.push_back({row[0], 60, y, 100, 20});
        t.push_back({row[1], 270, y, 30, 20});
        t.push_back({row[2], 450, y, 60, 20});
        t.push_back({row[3], 665, y, 55, 20});
        y += 60;
    }
    return realize_layout(source_id, 900, 700, t, o.jitter_frac, rng);
}

FixtureSpec default_fixture_spec(std::uint64_t seed) {
    FixtureSpec spec;
    spec.seed = seed;
    spec.window_start = date_from_ymd(2021, 1, 1);
    spec.window_end = date_from_ymd(2022, 12, 31);

    spec.peaks = {
        {date_from_ymd(2021, 2, 9), true, 24, "preorder"},
        {date_from_ymd(2021, 11, 24), false, 18, "delay"},
        {date_from_ymd(2022, 4, 22), false, 12, "outage"},
    };
    spec.outages = {
        {date_from_ymd(2021, 3, 10), 10, 3},
        {date_from_ymd(2022, 1, 7), 12, 3},
        {date_from_ymd(2022, 4, 22), 8, 3},  // coincides with the third peak
        {date_from_ymd(2022, 8, 30), 14, 3},
    };
    spec.popular.date = date_from_ymd(2022, 2, 23);

    const double medians[24] = {62.5,  71.3,  80.1, 88.7, 95.4, 102.6, 97.8, 91.2,
                                138.4, 125.9, 112.3, 105.7, 110.2, 96.5, 89.9, 84.3,
                                78.6,  74.1,  70.8, 66.2, 63.5, 60.9, 58.4, 55.1};
    const std::size_t strong_pos[24] = {4, 3, 5, 2, 6, 3, 0, 4, 0, 5, 3, 4,
                                        2, 5, 3, 4, 6, 2, 3, 5, 0, 4, 3, 2};
    const std::size_t strong_neg[24] = {1, 2, 1, 3, 1, 2, 0, 1, 3, 2, 1, 1,
                                        2, 1, 2, 1, 1, 3, 2, 1, 0, 2, 1, 3};
    const std::set<std::size_t> big_months = {2, 5, 8, 13, 17, 21};  // >= 30 samples
    for (std::size_t i = 0; i < 24; ++i) {
        MonthSpeedPlan plan;
        plan.median_mbps = medians[i];
        plan.samples = big_months.count(i) ? 31 : 15;
        plan.table_docs = big_months.count(i) ? 2 : 1;
        plan.rows_per_table = 3;
        plan.strong_pos = strong_pos[i];
        plan.strong_neg = strong_neg[i];
        spec.speed_by_month.push_back(plan);
    }
    return spec;
}

FixtureResult generate_fixture(const FixtureSpec& spec, const std::filesystem::path& out_dir,
                               const std::filesystem::path& data_dir_in) {
    // The emitted config resolves relative paths against its own directory,
    // so the data files must be referenced absolutely.
    auto data_dir = std::filesystem::absolute(data_dir_in);
    auto lexicon = sentiment::load_lexicon(data_dir / "lexicon_default.csv").lexicon;
    auto stopwords = textmine::load_stopwords(data_dir / "stopwords_en.txt");
    auto library = outage::load_library(data_dir / "outage_keywords.txt", stopwords).library;

    // The planted texts only work if the shipped data files agree with the
    // generator's word pools.
    for (const auto& w : kPositivePool)
        if (!lexicon.positive.count(w))
            throw error(errc::spec_infeasible, "lexicon lacks positive term '" + w + "'");
    for (const auto& w : kNegativePool)
        if (!lexicon.negative.count(w))
            throw error(errc::spec_infeasible, "lexicon lacks negative term '" + w + "'");
    for (const auto& w : kFillerPool) {
        if (lexicon.positive.count(w) || lexicon.negative.count(w) || stopwords.count(w) ||
            library.unigrams.count(w))
            throw error(errc::spec_infeasible, "filler term '" + w + "' is not neutral");
    }
    for (const auto& peak : spec.peaks) {
        if (peak.count < 1) throw error(errc::spec_infeasible, "peak count must be >= 1");
        if (lexicon.positive.count(peak.dominant) || lexicon.negative.count(peak.dominant) ||
            stopwords.count(peak.dominant))
            throw error(errc::spec_infeasible, "dominant term '" + peak.dominant +
                                                   "' must be sentiment-neutral");
    }
    if (spec.speed_by_month.size() !=
        static_cast<std::size_t>(month_of(spec.window_end).months -
                                 month_of(spec.window_start).months + 1))
        throw error(errc::spec_infeasible, "speed_by_month must cover every window month");

    Builder b(spec, lexicon, stopwords, library);
    Rng root(spec.seed);
    Rng rng_base = root.fork(1), rng_peaks = root.fork(2), rng_outage = root.fork(3),
        rng_speed = root.fork(4), rng_popular = root.fork(5), rng_misc = root.fork(6);

    std::set<Date> peak_dates;
    for (const auto& p : spec.peaks) peak_dates.insert(p.date);
    Month first_month = month_of(spec.window_start);
    Month popular_month = month_of(spec.popular.date);

    // Base chatter, plus sparse strong posts well below any planted peak.
    for (Date day = spec.window_start; day <= spec.window_end; day = add_days(day, 1)) {
        int n = spec.base_posts_per_day_min +
                static_cast<int>(rng_base.below(
                    static_cast<std::uint64_t>(spec.base_posts_per_day_max -
                                               spec.base_posts_per_day_min + 1)));
        for (int i = 0; i < n; ++i) {
            bool removed = rng_base.uniform() < 0.01;
            std::string title = b.fillers(2 + rng_base.below(2), rng_base);
            std::string body = b.fillers(5 + rng_base.below(5), rng_base);
            if (rng_base.uniform() < 0.3)
                body += ' ' + b.pick(rng_base.uniform() < 0.5 ? kPositivePool : kNegativePool,
                                     rng_base);
            if (removed) body = "[deleted]";
            std::int64_t upvotes = rng_base.uniform() < 0.02
                                       ? -static_cast<std::int64_t>(1 + rng_base.below(5))
                                       : static_cast<std::int64_t>(rng_base.below(31));
            std::string author = rng_base.uniform() < 0.7
                                     ? "u" + std::to_string(rng_base.below(2000))
                                     : std::string{};
            auto ts = day_seconds(day, 9, i * 9 + static_cast<int>(rng_base.below(5)));
            auto id = b.add_post(day, ts, title, body, upvotes, author);
            if (!removed) b.base_posts_by_day[day].push_back(b.post_index[id]);

            int n_comments = spec.comments_per_post_min +
                             static_cast<int>(rng_base.below(static_cast<std::uint64_t>(
                                 spec.comments_per_post_max - spec.comments_per_post_min + 1)));
            std::string parent = id;
            for (int k = 0; k < n_comments; ++k) {
                std::string cbody = b.fillers(4 + rng_base.below(5), rng_base);
                if (rng_base.uniform() < 0.25)
                    cbody += ' ' + b.pick(rng_base.uniform() < 0.5 ? kPositivePool : kNegativePool,
                                          rng_base);
                if (rng_base.uniform() < 0.01) cbody = "[deleted]";
                std::string cparent = parent;
                if (rng_base.uniform() < 0.01) cparent = "missing_" + std::to_string(k);
                auto cid = b.add_comment(id, cparent, day, ts + 600 + k * 300, cbody,
                                         static_cast<std::int64_t>(rng_base.below(16)),
                                         rng_base.uniform() < 0.7
                                             ? "u" + std::to_string(rng_base.below(2000))
                                             : std::string{});
                if (rng_base.uniform() < 0.4) parent = cid;  // grow some depth
            }
        }
        // Background strong posts; suppressed on planted peak days so those
        // counts stay exact.
        if (!peak_dates.count(day)) {
            if (rng_base.uniform() < 0.3) {
                std::size_t k = 1 + rng_base.below(3);
                for (std::size_t i = 0; i < k; ++i)
                    b.add_post(day, day_seconds(day, 14, static_cast<int>(i) * 7), "field report",
                               b.strong_text(true, rng_base),
                               static_cast<std::int64_t>(rng_base.below(31)), "u1",
                               {});
            }
            if (rng_base.uniform() < 0.3) {
                std::size_t k = 1 + rng_base.below(3);
                for (std::size_t i = 0; i < k; ++i)
                    b.add_post(day, day_seconds(day, 15, static_cast<int>(i) * 7), "rant",
                               b.strong_text(false, rng_base),
                               static_cast<std::int64_t>(rng_base.below(31)), "u2", {});
            }
        }
    }

    // Planted sentiment peaks.
    for (const auto& peak : spec.peaks) {
        for (std::size_t i = 0; i < peak.count; ++i) {
            std::string title = peak.dominant + ' ' + b.fillers(1, rng_peaks);
            std::string body = peak.dominant + ' ' + peak.dominant + ' ' + peak.dominant + ' ' +
                               peak.dominant + ' ' + b.strong_text(peak.positive, rng_peaks);
            auto label = b.label_of(title + ' ' + body);
            if (label != (peak.positive ? sentiment::StrongLabel::strong_pos
                                        : sentiment::StrongLabel::strong_neg))
                throw error(errc::spec_infeasible,
                            "planted peak text does not classify as intended");
            auto id = b.add_post(peak.date, day_seconds(peak.date, 10, static_cast<int>(i) * 3),
                                 title, body, static_cast<std::int64_t>(rng_peaks.below(31)),
                                 "u3");
            b.add_comment(id, id, peak.date, day_seconds(peak.date, 11, static_cast<int>(i) * 3),
                          b.fillers(5, rng_peaks), 2, "u4");
        }
    }

    // Outage chatter lives in comments under same-day posts.
    auto host_post = [&](Date day, Rng& rng) -> std::string {
        auto it = b.base_posts_by_day.find(day);
        if (it == b.base_posts_by_day.end() || it->second.empty())
            throw error(errc::spec_infeasible, "no host post on " + to_iso_date(day));
        auto& idxs = it->second;
        return b.posts[idxs[rng.below(idxs.size())]].rec["id"].get<std::string>();
    };
    for (const auto& out : spec.outages) {
        for (std::size_t i = 0; i < out.comments; ++i) {
            std::string body;
            for (std::size_t h = 0; h < out.hits_per_comment; ++h) body += "outage ";
            body += b.pick(kNegativePool, rng_outage) + ' ' + b.fillers(1, rng_outage);
            auto host = host_post(out.date, rng_outage);
            b.add_comment(host, host, out.date,
                          day_seconds(out.date, 12, static_cast<int>(i) * 2), body, 1, "u5");
        }
    }
    std::set<Date> protected_days;  // majors and their immediate surroundings
    for (const auto& out : spec.outages)
        for (int d = -2; d <= 2; ++d) protected_days.insert(add_days(out.date, d));
    std::set<Date> minor_days;
    while (minor_days.size() < spec.minor_outage_days) {
        Date day = add_days(spec.window_start,
                            10 + static_cast<int>(rng_outage.below(static_cast<std::uint64_t>(
                                     days_between(spec.window_start, spec.window_end) - 12))));
        if (protected_days.count(day) || minor_days.count(day)) continue;
        minor_days.insert(day);
        std::size_t hits = 2 + rng_outage.below(3);  // 2..4, under the flag floor
        std::string body;
        for (std::size_t h = 0; h < hits; ++h) body += "outage ";
        body += b.pick(kNegativePool, rng_outage);
        auto host = host_post(day, rng_outage);
        b.add_comment(host, host, day, day_seconds(day, 13, 0), body, 0, "u6");
    }
    for (std::size_t i = 0; i < spec.positive_keyword_decoys; ++i) {
        Date day = add_days(spec.window_start,
                            10 + static_cast<int>(rng_outage.below(static_cast<std::uint64_t>(
                                     days_between(spec.window_start, spec.window_end) - 12))));
        if (protected_days.count(day)) continue;
        // Keyword present, sentiment positive: step 2 must drop these.
        std::string body = "outage " + b.strong_text(true, rng_outage);
        auto host = host_post(day, rng_outage);
        b.add_comment(host, host, day, day_seconds(day, 16, static_cast<int>(i)), body, 3, "u7");
    }

    // Speed-test posts and their OCR documents.
    std::map<Month, double> planted_medians;
    Month month_cursor = first_month;
    for (std::size_t mi = 0; mi < spec.speed_by_month.size(); ++mi, month_cursor.months++) {
        const auto& plan = spec.speed_by_month[mi];
        Month month = month_cursor;
        planted_medians[month] = plan.median_mbps;
        if (plan.samples % 2 == 0)
            throw error(errc::spec_infeasible, "sample count must be odd for an exact median");
        std::size_t table_values = plan.table_docs * plan.rows_per_table;
        if (table_values + 1 > plan.samples)
            throw error(errc::spec_infeasible, "table rows exceed month samples");

        // Odd count, exact middle, everything within +/-7% of the median.
        std::size_t half = (plan.samples - 1) / 2;
        std::vector<std::string> values;
        for (std::size_t i = 0; i < half; ++i)
            values.push_back(
                format1(plan.median_mbps * (1.0 - (0.01 + 0.06 * rng_speed.uniform()))));
        values.push_back(format1(plan.median_mbps));
        for (std::size_t i = 0; i < half; ++i)
            values.push_back(
                format1(plan.median_mbps * (1.0 + (0.01 + 0.06 * rng_speed.uniform()))));
        for (std::size_t i = 0; i < half; ++i) {
            if (!(parse1(values[i]) < plan.median_mbps) ||
                !(parse1(values[plan.samples - 1 - i]) > plan.median_mbps))
                throw error(errc::spec_infeasible, "rounded sample collides with the median");
        }
        // Deterministic interleave so table rows draw from the whole range.
        std::vector<std::string> order;
        for (std::size_t i = 0; i < values.size(); ++i)
            order.push_back(values[(i * 7) % values.size()]);

        int days_in_month = days_between(first_day(month), last_day(month)) + 1;
        auto month_day = [&](Rng& rng) {
            for (;;) {
                Date d = add_days(first_day(month), static_cast<int>(rng.below(days_in_month)));
                if (!peak_dates.count(d)) return d;
            }
        };

        std::size_t vi = 0;
        for (std::size_t t = 0; t < plan.table_docs; ++t) {
            Date day = month_day(rng_speed);
            TableLayoutOptions opts;
            opts.with_dates = t % 2 == 0;
            opts.jitter_frac = 0.1;
            for (std::size_t r = 0; r < plan.rows_per_table; ++r) {
                std::string down = order[vi++];
                opts.rows.push_back({to_iso_date(day), std::to_string(20 + rng_speed.below(60)),
                                     down, format1(parse1(down) / 7.0)});
                b.kept_downloads[month].push_back(parse1(down));
            }
            std::string media = b.media_id();
            auto ts = day_seconds(day, 17, static_cast<int>(t));
            b.add_post(day, ts, "starlink speed log " + b.fillers(1, rng_speed),
                       "sharing my starlink results " + b.fillers(2, rng_speed),
                       static_cast<std::int64_t>(rng_speed.below(31)), "u8", {media});
            b.ocr_docs[media + ".json"] =
                speedtest::ocr_document_json(table_ocr_doc(media, opts, rng_speed));
        }

        std::size_t simple_count = plan.samples - table_values;
        if (plan.strong_pos + plan.strong_neg > simple_count)
            throw error(errc::spec_infeasible, "not enough sharing posts for planted Pos");
        for (std::size_t s = 0; s < simple_count; ++s) {
            Date day = month_day(rng_speed);
            std::string down = order[vi++];
            b.kept_downloads[month].push_back(parse1(down));

            std::string body;
            sentiment::StrongLabel want = sentiment::StrongLabel::none;
            if (s < plan.strong_pos) {
                body = "starlink " + b.strong_text(true, rng_speed);
                want = sentiment::StrongLabel::strong_pos;
            } else if (s < plan.strong_pos + plan.strong_neg) {
                body = "starlink " + b.strong_text(false, rng_speed);
                want = sentiment::StrongLabel::strong_neg;
            } else {
                body = "my starlink speed test " + b.fillers(3, rng_speed);
            }
            if (b.label_of("speed test " + body) != want)
                throw error(errc::spec_infeasible, "sharing post text does not classify as intended");
            if (want == sentiment::StrongLabel::strong_pos) ++b.sharing_strong_pos[month];
            if (want == sentiment::StrongLabel::strong_neg) ++b.sharing_strong_neg[month];

            std::string media = b.media_id();
            auto ts = day_seconds(day, 18, static_cast<int>(s));
            b.add_post(day, ts, "speed test", body, static_cast<std::int64_t>(rng_speed.below(31)),
                       "u9", {media});
            SimpleLayoutOptions opts;
            opts.download = down;
            opts.upload = format1(parse1(down) / 7.0);
            opts.latency_ms = 20 + static_cast<int>(rng_speed.below(60));
            opts.attached_units = s % 2 == 0;
            opts.latency_attached = s % 2 == 1;
            opts.with_date = s % 3 != 0;
            opts.date = day;
            opts.jitter_frac = 0.1;
            b.ocr_docs[media + ".json"] =
                speedtest::ocr_document_json(simple_ocr_doc(media, opts, rng_speed));
        }
    }

    // Implausible and foreign-provider documents that the filter must drop.
    std::size_t window_months = spec.speed_by_month.size();
    for (std::size_t i = 0; i < spec.absurd_value_docs; ++i) {
        Month month = Month{first_month.months + static_cast<int>((i * 7 + 1) % window_months)};
        Date day = add_days(first_day(month), 5);
        std::string media = b.media_id();
        b.add_post(day, day_seconds(day, 19, static_cast<int>(i)), "starlink speed",
                   "my starlink screenshot " + b.fillers(2, rng_misc), 5, "u10", {media});
        const char* bad_down[] = {"4500.0", "0.05", "120.0"};
        const char* bad_up[] = {"30.0", "2.0", "900.0"};
        SimpleLayoutOptions opts;
        opts.download = bad_down[i % 3];
        opts.upload = bad_up[i % 3];
        opts.latency_ms = 30;
        opts.jitter_frac = 0.1;
        b.ocr_docs[media + ".json"] =
            speedtest::ocr_document_json(simple_ocr_doc(media, opts, rng_misc));
    }
    for (std::size_t i = 0; i < spec.foreign_provider_docs; ++i) {
        Month month = Month{first_month.months + static_cast<int>((i * 5 + 3) % window_months)};
        Date day = add_days(first_day(month), 8);
        std::string media = b.media_id();
        b.add_post(day, day_seconds(day, 20, static_cast<int>(i)), "cabin connection",
                   "my fiberco line at the cabin " + b.fillers(2, rng_misc), 4, "u11", {media});
        SimpleLayoutOptions opts;
        opts.provider = "FiberCo";
        opts.download = "88.8";
        opts.upload = "12.1";
        opts.latency_ms = 25;
        opts.jitter_frac = 0.1;
        b.ocr_docs[media + ".json"] =
            speedtest::ocr_document_json(simple_ocr_doc(media, opts, rng_misc));
    }

    // The planted popular post: unigram and bigram dominance by construction.
    std::string popular_post_id;
    {
        const auto& pop = spec.popular;
        Date day = pop.date;
        std::string title = pop.unigram + " enabled on my dish " + pop.unigram;
        std::string body = pop.bigram + " today and working";
        auto id = b.add_post(day, day_seconds(day, 8, 30), title, body, pop.upvotes, "u12");
        popular_post_id = id;
        std::string parent = id;
        for (std::size_t i = 0; i < pop.comments; ++i) {
            std::string cbody = pop.bigram + " spot" + std::to_string(i) + ' ' + pop.unigram;
            if (i % 5 == 0) cbody += " love love love";
            auto cid = b.add_comment(id, parent, day, day_seconds(day, 9, static_cast<int>(i)),
                                     cbody, static_cast<std::int64_t>(rng_popular.below(20)),
                                     "u13");
            if (i % 4 == 0) parent = cid;
        }

        // Decoys hold one percentile axis each so only the planted post sits
        // in the intersection.
        std::size_t n0 = 0;
        for (const auto& p : b.posts) {
            if (corpus::default_removal_sentinels().count(p.rec["selftext"].get<std::string>()))
                continue;
            Date d = date_from_epoch_seconds(p.rec["created_utc"].get<std::int64_t>());
            if (month_of(d) == popular_month) ++n0;
        }
        std::optional<std::size_t> decoys;
        for (std::size_t d = 0; d <= 60; ++d) {
            std::size_t n = n0 + 2 * d;
            std::size_t rank = (99 * n + 99) / 100;  // ceil(0.99 n)
            if (n - rank + 1 == d + 1) {
                decoys = d;
                break;
            }
        }
        if (!decoys) throw error(errc::spec_infeasible, "no decoy count fits the popular month");
        for (std::size_t d = 0; d < *decoys; ++d) {
            // High upvotes, few comments.
            auto uid = b.add_post(add_days(day, -3), day_seconds(add_days(day, -3), 10, int(d)),
                                  "hot take", b.fillers(6, rng_popular),
                                  40 + static_cast<std::int64_t>(10 * d), "u14");
            for (int k = 0; k < 3; ++k)
                b.add_comment(uid, uid, add_days(day, -3),
                              day_seconds(add_days(day, -3), 11, k), b.fillers(5, rng_popular), 1,
                              "u15");
            // Many comments, modest upvotes.
            auto cidp = b.add_post(add_days(day, 2), day_seconds(add_days(day, 2), 10, int(d)),
                                   "question thread", b.fillers(6, rng_popular),
                                   static_cast<std::int64_t>(rng_popular.below(20)), "u16");
            for (std::size_t k = 0; k < 18 + 2 * d; ++k)
                b.add_comment(cidp, cidp, add_days(day, 2),
                              day_seconds(add_days(day, 2), 11, static_cast<int>(k)),
                              b.fillers(4, rng_popular), 0, "u17");
        }
    }

    // --- Realized-outcome verification, all through the production code ---

    peaks::DailySeries realized;
    realized.start = spec.window_start;
    realized.end = spec.window_end;
    realized.pos_counts.assign(realized.span(), 0);
    realized.neg_counts.assign(realized.span(), 0);
    for (const auto& [day, count] : b.strong_pos_by_day)
        realized.pos_counts[static_cast<std::size_t>(day.days - spec.window_start.days)] = count;
    for (const auto& [day, count] : b.strong_neg_by_day)
        realized.neg_counts[static_cast<std::size_t>(day.days - spec.window_start.days)] = count;
    auto top = peaks::top_peaks(realized, spec.peaks.size(), 2);
    if (top.size() != spec.peaks.size())
        throw error(errc::spec_infeasible, "planted peaks are not the top peaks");
    std::vector<const PlantedPeak*> by_count;
    for (const auto& p : spec.peaks) by_count.push_back(&p);
    std::sort(by_count.begin(), by_count.end(),
              [](const PlantedPeak* a, const PlantedPeak* e) { return a->count > e->count; });
    for (std::size_t i = 0; i < top.size(); ++i) {
        bool positive = top[i].polarity == peaks::Polarity::positive;
        if (top[i].date != by_count[i]->date || positive != by_count[i]->positive ||
            top[i].count != by_count[i]->count)
            throw error(errc::spec_infeasible, "realized peak ranking diverges from the plan");
    }

    outage::OutageSeries series;
    series.start = spec.window_start;
    series.end = spec.window_end;
    series.counts.assign(series.span(), 0);
    series.flagged.assign(series.span(), false);
    for (const auto& [day, hits] : b.outage_hits_by_day)
        series.counts[static_cast<std::size_t>(day.days - spec.window_start.days)] = hits;
    series = outage::flag_spikes(std::move(series));
    std::set<Date> expected_flags;
    for (const auto& out : spec.outages) expected_flags.insert(out.date);
    std::set<Date> realized_flags;
    for (std::size_t i = 0; i < series.span(); ++i)
        if (series.flagged[i]) realized_flags.insert(add_days(series.start, static_cast<int>(i)));
    if (realized_flags != expected_flags)
        throw error(errc::spec_infeasible, "realized outage flags diverge from the plan");

    for (const auto& [month, values] : b.kept_downloads) {
        if (trends::median(values) != planted_medians.at(month))
            throw error(errc::spec_infeasible, "realized median diverges for " + to_iso_month(month));
    }

    {
        std::vector<double> ups, coms;
        std::vector<std::pair<std::string, std::pair<double, double>>> month_posts;
        for (const auto& p : b.posts) {
            if (corpus::default_removal_sentinels().count(p.rec["selftext"].get<std::string>()))
                continue;
            Date d = date_from_epoch_seconds(p.rec["created_utc"].get<std::int64_t>());
            if (month_of(d) != popular_month) continue;
            double up = static_cast<double>(p.rec["score"].get<std::int64_t>());
            double com = static_cast<double>(p.comments);
            ups.push_back(up);
            coms.push_back(com);
            month_posts.push_back({p.rec["id"].get<std::string>(), {up, com}});
        }
        double p99u = popularity::percentile(ups, 99.0);
        double p99c = popularity::percentile(coms, 99.0);
        std::vector<std::string> qualifying;
        for (const auto& [id, uc] : month_posts)
            if (uc.first >= p99u && uc.second >= p99c) qualifying.push_back(id);
        if (qualifying.size() != 1 || qualifying[0] != popular_post_id)
            throw error(errc::spec_infeasible,
                        "popular month intersection is not exactly the planted post");
    }

    // --- Emit --------------------------------------------------------------

    std::filesystem::create_directories(out_dir / "ocr");
    std::string posts_nd, comments_nd;
    for (auto& p : b.posts) {
        p.rec["num_comments"] = p.comments;
        posts_nd += p.rec.dump();
        posts_nd += '\n';
    }
    for (const auto& c : b.comments) {
        comments_nd += c.dump();
        comments_nd += '\n';
    }
    write_file(out_dir / "posts.ndjson", posts_nd);
    write_file(out_dir / "comments.ndjson", comments_nd);
    for (const auto& [name, text] : b.ocr_docs) write_file(out_dir / "ocr" / name, text);

    std::string launches = "month,count\n";
    for (Month m = first_month; m <= month_of(spec.window_end); m.months++)
        launches += to_iso_month(m) + ',' +
                    std::to_string(1 + (m.months - first_month.months) * 7 % 4) + '\n';
    write_file(out_dir / "launches.csv", launches);
    write_file(out_dir / "users.csv",
               "date,count\n2021-02-15,10000\n2021-08-01,90000\n2021-11-15,140000\n"
               "2022-02-15,250000\n2022-05-01,400000\n2022-09-01,700000\n2022-12-15,1000000\n");

    json expected;
    expected["window"] = {{"start", to_iso_date(spec.window_start)},
                          {"end", to_iso_date(spec.window_end)}};
    json peaks_json = json::array();
    for (const auto* p : by_count)
        peaks_json.push_back({{"date", to_iso_date(p->date)},
                              {"polarity", p->positive ? "POSITIVE" : "NEGATIVE"},
                              {"count", p->count},
                              {"dominant", p->dominant}});
    expected["peaks"] = std::move(peaks_json);
    json flags = json::array();
    for (const auto& d : expected_flags) flags.push_back(to_iso_date(d));
    expected["outage_flagged_days"] = std::move(flags);
    json day_counts;
    for (const auto& [day, hits] : b.outage_hits_by_day) day_counts[to_iso_date(day)] = hits;
    expected["outage_day_counts"] = std::move(day_counts);
    expected["popular"] = {{"month", to_iso_month(popular_month)},
                           {"post_id", popular_post_id},
                           {"top_unigram", spec.popular.unigram},
                           {"top_bigram", spec.popular.bigram}};
    json medians_json;
    for (const auto& [month, value] : planted_medians) medians_json[to_iso_month(month)] = value;
    expected["monthly_download_medians"] = std::move(medians_json);
    json samples_json;
    for (const auto& [month, values] : b.kept_downloads)
        samples_json[to_iso_month(month)] = values.size();
    expected["monthly_samples"] = std::move(samples_json);
    json pos_json;
    for (Month m = first_month; m <= month_of(spec.window_end); m.months++) {
        std::size_t sp = b.sharing_strong_pos.count(m) ? b.sharing_strong_pos[m] : 0;
        std::size_t sn = b.sharing_strong_neg.count(m) ? b.sharing_strong_neg[m] : 0;
        json entry = {{"strong_pos", sp}, {"strong_neg", sn}};
        if (sp + sn > 0)
            entry["pos"] = static_cast<double>(sp) / static_cast<double>(sp + sn);
        else
            entry["pos"] = nullptr;
        pos_json[to_iso_month(m)] = std::move(entry);
    }
    expected["monthly_pos"] = std::move(pos_json);
    expected["totals"] = {{"posts", b.posts.size()},
                          {"comments", b.comments.size()},
                          {"ocr_docs", b.ocr_docs.size()}};

    write_file(out_dir / "expected.json", expected.dump(2) + "\n");

    json config;
    config["posts"] = "posts.ndjson";
    config["comments"] = "comments.ndjson";
    config["window"] = {{"start", to_iso_date(spec.window_start)},
                        {"end", to_iso_date(spec.window_end)}};
    config["stopwords"] = (data_dir / "stopwords_en.txt").string();
    config["keyword_library"] = (data_dir / "outage_keywords.txt").string();
    config["sentiment"] = {{"provider", "lexicon"},
                           {"lexicon", (data_dir / "lexicon_default.csv").string()}};
    config["peaks"] = {{"k", spec.peaks.size()}};
    config["speedtest"] = {{"ocr_dir", "ocr"}};
    config["trends"] = {{"launches", "launches.csv"}, {"users", "users.csv"}};
    config["out"] = "out";
    config["seed"] = spec.seed;
    write_file(out_dir / "config.json", config.dump(2) + "\n");

    FixtureResult result;
    result.dir = out_dir;
    result.config_path = out_dir / "config.json";
    result.expected_path = out_dir / "expected.json";
    result.posts = b.posts.size();
    result.comments = b.comments.size();
    result.ocr_docs = b.ocr_docs.size();
    return result;
}

}  // namespace netlens::fixture
