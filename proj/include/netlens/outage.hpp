#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "netlens/corpus.hpp"
#include "netlens/dates.hpp"
#include "netlens/sentiment.hpp"
#include "netlens/textmine.hpp"

namespace netlens::outage {

enum class KeywordSource { seed_file, mined };

/// Curated uni/bi-grams indicative of service trouble. Entries are lowercase
/// and must survive stop-word filtering.
struct KeywordLibrary {
    std::set<std::string> unigrams;
    std::set<std::string> bigrams;  // space-joined token pairs
    std::map<std::string, KeywordSource> provenance;
};

struct MinedKeyword {
    std::string term;
    double lift = 0.0;  // seed count / (corpus count + 1)
    std::size_t seed_count = 0;
    std::size_t corpus_count = 0;
};

struct MiningResult {
    std::vector<MinedKeyword> unigrams;  // lift descending
    std::vector<MinedKeyword> bigrams;
    KeywordLibrary candidates;  // tagged mined, for human review
};

/// Ranks candidate n-grams by frequency lift of seed documents against the
/// whole corpus. Candidates are never auto-promoted into a live library.
MiningResult mine_keywords(const std::vector<textmine::TokenStream>& seed_docs,
                           const std::vector<textmine::TokenStream>& corpus_docs,
                           std::size_t top_m = 30);

struct LibraryLoadResult {
    KeywordLibrary library;
    std::vector<std::string> warnings;
};

/// One n-gram per line, '#' starts a comment. Invalid lines are skipped with
/// a warning; an entirely invalid file raises error(no_valid_entries).
LibraryLoadResult load_library(const std::filesystem::path& file,
                               const textmine::StopwordSet& stopwords);

enum class QualifyMode { negative_over_positive, strong_negative_only };

/// Per-item sentiment lookup; items without a score never qualify.
using ScoreLookup = std::function<const sentiment::SentimentScore*(const std::string& item_id)>;

struct QualifiedItem {
    std::string item_id;
    Date day;
    std::size_t keyword_hits = 0;  // total keyword occurrences in the item
    std::vector<std::string> matched;
};

struct QualifiedThread {
    std::string post_id;
    std::vector<QualifiedItem> items;
    std::set<std::string> matched;
};

/// An item qualifies when its token stream contains a library keyword and
/// its sentiment leans negative; a thread qualifies when any item does.
std::vector<QualifiedThread> qualify_threads(const std::vector<corpus::Thread>& threads,
                                             const KeywordLibrary& library,
                                             const ScoreLookup& scores,
                                             const textmine::StopwordSet& stopwords,
                                             QualifyMode mode = QualifyMode::negative_over_positive,
                                             double tau = 0.7);

/// Keyword occurrences per n-gram in one token stream. Unigram and bigram
/// entries are counted independently.
std::size_t count_keyword_hits(const textmine::TokenStream& tokens, const KeywordLibrary& library,
                               std::vector<std::string>* matched = nullptr);

struct OutageSeries {
    Date start;
    Date end;
    std::vector<std::size_t> counts;
    std::vector<bool> flagged;

    std::size_t span() const { return static_cast<std::size_t>(end.days - start.days) + 1; }
};

/// Day-wise keyword occurrence totals over qualifying items, zero-filled.
OutageSeries keyword_day_series(const std::vector<QualifiedThread>& qualified, Date start,
                                Date end);

struct SpikeParams {
    int window_days = 28;
    double z = 3.0;
    std::size_t min_count = 5;
    int min_history_days = 7;
};

/// Flags day d when counts[d] >= min_count and counts[d] exceeds
/// mean + z*stddev of the trailing window (d excluded). Days with fewer than
/// min_history_days of history are never flagged. Throws
/// error(series_too_short) for series under 8 days.
OutageSeries flag_spikes(OutageSeries series, const SpikeParams& params = {});

std::string outage_series_csv(const OutageSeries& series);

}  // namespace netlens::outage
