#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "netlens/dates.hpp"

namespace netlens::textmine {

/// Lowercased tokens, stop-words removed, every token at least 2 chars.
using TokenStream = std::vector<std::string>;

using StopwordSet = std::set<std::string>;

/// Lowercase; split on any non-alphanumeric character except apostrophes
/// flanked by alphanumerics; drop stop-words and tokens shorter than 2.
TokenStream tokenize_filter(const std::string& text, const StopwordSet& stopwords);

/// n-gram (space-joined) -> frequency, aggregated over documents.
struct NGramCounts {
    int n = 1;
    std::map<std::string, std::size_t> counts;
};

/// Sliding-window n-grams per document; windows never cross documents.
NGramCounts ngram_counts(const std::vector<TokenStream>& docs, int n);

/// Top-k by frequency descending, ties broken lexicographically ascending.
std::vector<std::pair<std::string, std::size_t>> word_cloud(const NGramCounts& counts,
                                                            std::size_t k);

struct EventQuery {
    Date date;
    std::vector<std::string> keywords;  // top unigrams of the day, at most 3
    std::string query;                  // keywords + brand + ISO date
};

/// Builds the search query for one day's documents. The query is only
/// emitted; no search is ever performed. Throws error(empty_day) when no
/// tokens survive filtering.
EventQuery event_query(Date date, const std::vector<std::string>& day_texts,
                       const StopwordSet& stopwords, const std::string& brand = "Starlink");

/// One token per line; blank lines ignored.
StopwordSet load_stopwords(const std::filesystem::path& file);

}  // namespace netlens::textmine
