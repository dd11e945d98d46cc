#pragma once

#include <functional>
#include <string>
#include <vector>

#include "netlens/corpus.hpp"
#include "netlens/dates.hpp"
#include "netlens/sentiment.hpp"
#include "netlens/textmine.hpp"

namespace netlens::popularity {

/// Nearest-rank percentile: value at 1-based index ceil(p/100 * n) of the
/// ascending sort; p = 0 yields the minimum. No interpolation.
double percentile(std::vector<double> values, double p);

struct MonthlyPopularity {
    Month month;
    double p99_upvotes = 0.0;
    double p99_comments = 0.0;
    std::vector<std::string> popular;  // upvotes desc, comments desc, id asc
    std::size_t total_posts = 0;
};

/// Popular = at or above the month's pth percentile on both upvotes and
/// comment count. Thresholds are inclusive.
MonthlyPopularity popular_posts(Month month, const std::vector<const corpus::Post*>& month_posts,
                                double p = 99.0);

struct TopicReport {
    std::string post_id;
    std::vector<std::pair<std::string, std::size_t>> top_unigrams;
    std::vector<std::pair<std::string, std::size_t>> top_bigrams;
    std::size_t strong_pos = 0;
    std::size_t strong_neg = 0;
    std::size_t none = 0;
};

using Scorer = std::function<sentiment::SentimentScore(const std::string& text)>;

/// Word clouds over the post (title + body) and every comment body, plus a
/// strong-sentiment tally over the same documents.
TopicReport topic_report(const corpus::Thread& thread, const textmine::StopwordSet& stopwords,
                         const Scorer& scorer, double tau = 0.7, std::size_t top_k = 10);

std::string monthly_popularity_json(const std::vector<MonthlyPopularity>& months,
                                    const std::vector<std::vector<TopicReport>>& reports);

}  // namespace netlens::popularity
