#include "netlens/popularity.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "netlens/errors.hpp"
#include "netlens/util.hpp"

namespace netlens::popularity {

double percentile(std::vector<double> values, double p) {
    if (values.empty()) throw error(errc::empty_input, "percentile of empty set");
    if (p < 0.0 || p > 100.0) throw error(errc::config_error, "percentile p out of [0,100]");
    std::sort(values.begin(), values.end());
    std::size_t n = values.size();
    std::size_t rank;  // 1-based
    if (p == 0.0) {
        rank = 1;
    } else if (p == std::floor(p)) {
        // Integer p: exact integer ceiling, immune to FP rounding.
        auto pi = static_cast<std::size_t>(p);
        rank = (pi * n + 99) / 100;
    } else {
        rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n) / 100.0));
    }
    if (rank < 1) rank = 1;
    if (rank > n) rank = n;
    return values[rank - 1];
}

MonthlyPopularity popular_posts(Month month, const std::vector<const corpus::Post*>& month_posts,
                                double p) {
    if (month_posts.empty()) throw error(errc::empty_month, to_iso_month(month));
    MonthlyPopularity result;
    result.month = month;
    result.total_posts = month_posts.size();

    std::vector<double> upvotes, comments;
    upvotes.reserve(month_posts.size());
    comments.reserve(month_posts.size());
    for (const corpus::Post* post : month_posts) {
        upvotes.push_back(static_cast<double>(post->upvotes));
        comments.push_back(static_cast<double>(post->comment_count));
    }
    result.p99_upvotes = percentile(upvotes, p);
    result.p99_comments = percentile(comments, p);

    std::vector<const corpus::Post*> hits;
    for (const corpus::Post* post : month_posts) {
        if (static_cast<double>(post->upvotes) >= result.p99_upvotes &&
            static_cast<double>(post->comment_count) >= result.p99_comments)
            hits.push_back(post);
    }
    std::sort(hits.begin(), hits.end(), [](const corpus::Post* a, const corpus::Post* b) {
        if (a->upvotes != b->upvotes) return a->upvotes > b->upvotes;
        if (a->comment_count != b->comment_count) return a->comment_count > b->comment_count;
        return a->id < b->id;
    });
    for (const corpus::Post* post : hits) result.popular.push_back(post->id);
    return result;
}

TopicReport topic_report(const corpus::Thread& thread, const textmine::StopwordSet& stopwords,
                         const Scorer& scorer, double tau, std::size_t top_k) {
    TopicReport report;
    report.post_id = thread.root.id;

    std::vector<std::string> texts;
    texts.push_back(thread.root.title + ' ' + thread.root.body);
    std::vector<const corpus::CommentNode*> stack;
    for (const auto& child : thread.children) stack.push_back(&child);
    while (!stack.empty()) {
        const corpus::CommentNode* node = stack.back();
        stack.pop_back();
        texts.push_back(node->comment.body);
        for (const auto& child : node->children) stack.push_back(&child);
    }
    for (const auto& orphan : thread.orphan_comments) texts.push_back(orphan.body);

    std::vector<textmine::TokenStream> docs;
    docs.reserve(texts.size());
    for (const auto& text : texts) docs.push_back(textmine::tokenize_filter(text, stopwords));
    report.top_unigrams = textmine::word_cloud(textmine::ngram_counts(docs, 1), top_k);
    report.top_bigrams = textmine::word_cloud(textmine::ngram_counts(docs, 2), top_k);

    for (const auto& text : texts) {
        switch (sentiment::classify_strong(scorer(text), tau)) {
            case sentiment::StrongLabel::strong_pos: ++report.strong_pos; break;
            case sentiment::StrongLabel::strong_neg: ++report.strong_neg; break;
            case sentiment::StrongLabel::none: ++report.none; break;
        }
    }
    return report;
}

std::string monthly_popularity_json(const std::vector<MonthlyPopularity>& months,
                                    const std::vector<std::vector<TopicReport>>& reports) {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < months.size(); ++i) {
        const auto& m = months[i];
        nlohmann::json j;
        j["month"] = to_iso_month(m.month);
        j["p99_upvotes"] = m.p99_upvotes;
        j["p99_comments"] = m.p99_comments;
        j["total_posts"] = m.total_posts;
        j["popular"] = m.popular;
        nlohmann::json rep = nlohmann::json::array();
        if (i < reports.size()) {
            for (const auto& r : reports[i]) {
                nlohmann::json tj;
                tj["post_id"] = r.post_id;
                nlohmann::json uni = nlohmann::json::array();
                for (const auto& [term, count] : r.top_unigrams)
                    uni.push_back({{"term", term}, {"count", count}});
                nlohmann::json bi = nlohmann::json::array();
                for (const auto& [term, count] : r.top_bigrams)
                    bi.push_back({{"term", term}, {"count", count}});
                tj["top_unigrams"] = std::move(uni);
                tj["top_bigrams"] = std::move(bi);
                tj["sentiment"] = {{"strong_pos", r.strong_pos},
                                   {"strong_neg", r.strong_neg},
                                   {"none", r.none}};
                rep.push_back(std::move(tj));
            }
        }
        j["reports"] = std::move(rep);
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

}  // namespace netlens::popularity
