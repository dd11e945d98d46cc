#include <doctest.h>

#include <map>

#include "netlens/errors.hpp"
#include "netlens/rng.hpp"
#include "netlens/textmine.hpp"

using namespace netlens;
using namespace netlens::textmine;

namespace {

std::string join(const TokenStream& tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out += ' ';
        out += t;
    }
    return out;
}

TokenStream random_doc(Rng& rng, std::size_t max_len) {
    static const std::vector<std::string> vocab = {"aa", "bb", "cc", "dd", "ee",
                                                   "ff", "gg", "hh", "ii", "jj"};
    TokenStream doc;
    for (std::size_t i = rng.below(max_len + 1); i > 0; --i)
        doc.push_back(vocab[rng.below(vocab.size())]);
    return doc;
}

/// Naive n-gram enumeration, the independent route the fast path is checked
/// against.
std::map<std::string, std::size_t> naive_ngrams(const std::vector<TokenStream>& docs, int n) {
    std::map<std::string, std::size_t> counts;
    for (const auto& doc : docs) {
        for (std::size_t i = 0; i < doc.size(); ++i) {
            if (i + n > doc.size()) continue;
            std::string gram;
            for (int j = 0; j < n; ++j) {
                if (j) gram += ' ';
                gram += doc[i + j];
            }
            ++counts[gram];
        }
    }
    return counts;
}

}  // namespace

TEST_CASE("tokenize_filter applies the splitting and filtering rules") {
    CHECK(tokenize_filter("Roaming was enabled!", {"was"}) ==
          TokenStream{"roaming", "enabled"});
    CHECK(tokenize_filter("", {}) == TokenStream{});
    CHECK(tokenize_filter("don't stop won't stop", {}) ==
          TokenStream{"don't", "stop", "won't", "stop"});
    CHECK(tokenize_filter("a I x", {}) == TokenStream{});  // single chars dropped
    CHECK(tokenize_filter("'quoted' trailing' 'leading", {}) ==
          TokenStream{"quoted", "trailing", "leading"});
    CHECK(tokenize_filter("UP-link речь 42ms", {}) == TokenStream{"up", "link", "42ms"});
}

TEST_CASE("tokenize_filter is idempotent over its own output") {
    Rng rng(3);
    const std::string chars = "abc' X.!2";
    for (int i = 0; i < 300; ++i) {
        std::string text;
        for (int k = int(rng.below(30)); k > 0; --k) text.push_back(chars[rng.below(chars.size())]);
        auto once = tokenize_filter(text, {"the", "ab"});
        CHECK(tokenize_filter(join(once), {"the", "ab"}) == once);
    }
}

TEST_CASE("ngram_counts slides windows within documents only") {
    TokenStream doc{"rr", "ee", "rr", "ee"};
    auto bi = ngram_counts({doc}, 2);
    // Enumerated by hand: windows are "rr ee", "ee rr", "rr ee".
    CHECK(bi.counts == std::map<std::string, std::size_t>{{"rr ee", 2}, {"ee rr", 1}});

    CHECK(ngram_counts({TokenStream{"xx"}}, 2).counts.empty());

    auto uni = ngram_counts({TokenStream{"aa", "bb"}, TokenStream{"aa", "bb"}}, 1);
    CHECK(uni.counts == std::map<std::string, std::size_t>{{"aa", 2}, {"bb", 2}});

    // No window spans the document boundary.
    auto cross = ngram_counts({TokenStream{"aa"}, TokenStream{"bb"}}, 2);
    CHECK(cross.counts.empty());
}

TEST_CASE("ngram_counts equals naive enumeration on random documents") {
    Rng rng(17);
    for (int round = 0; round < 200; ++round) {
        std::vector<TokenStream> docs;
        for (int d = int(rng.below(4)); d >= 0; --d) docs.push_back(random_doc(rng, 20));
        int n = 1 + int(rng.below(3));
        CHECK(ngram_counts(docs, n).counts == naive_ngrams(docs, n));
    }
}

TEST_CASE("unigram totals equal token count") {
    Rng rng(19);
    for (int i = 0; i < 100; ++i) {
        auto doc = random_doc(rng, 20);
        auto counts = ngram_counts({doc}, 1);
        std::size_t total = 0;
        for (const auto& [gram, c] : counts.counts) total += c;
        CHECK(total == doc.size());
    }
}

TEST_CASE("word_cloud ranks by frequency then lexicographically") {
    NGramCounts counts;
    counts.counts = {{"aa", 3}, {"bb", 3}, {"cc", 1}};
    auto top = word_cloud(counts, 2);
    REQUIRE(top.size() == 2);
    CHECK(top[0] == std::pair<std::string, std::size_t>{"aa", 3});
    CHECK(top[1] == std::pair<std::string, std::size_t>{"bb", 3});

    NGramCounts single;
    single.counts = {{"xx", 1}};
    CHECK(word_cloud(single, 5).size() == 1);
    CHECK(word_cloud(NGramCounts{}, 3).empty());
}

TEST_CASE("word_cloud rankings are prefix-stable in k") {
    Rng rng(23);
    NGramCounts counts;
    for (int i = 0; i < 40; ++i)
        counts.counts["w" + std::to_string(i)] = rng.below(6) + 1;
    auto small = word_cloud(counts, 10);
    auto large = word_cloud(counts, 25);
    for (std::size_t i = 0; i < small.size(); ++i) CHECK(small[i] == large[i]);
}

TEST_CASE("event_query emits keywords, brand, and date") {
    std::vector<std::string> day_docs;
    for (int i = 0; i < 5; ++i) day_docs.push_back("outage again");
    for (int i = 0; i < 4; ++i) day_docs.push_back("starlink行");
    for (int i = 0; i < 3; ++i) day_docs.push_back("internet");
    auto q = event_query(date_from_ymd(2022, 4, 22), day_docs, {"again"});
    CHECK(q.keywords == std::vector<std::string>{"outage", "starlink", "internet"});
    CHECK(q.query == "outage starlink internet Starlink 2022-04-22");

    auto small = event_query(date_from_ymd(2022, 5, 5), {"roaming"}, {});
    CHECK(small.keywords == std::vector<std::string>{"roaming"});
    CHECK(small.query == "roaming Starlink 2022-05-05");

    CHECK_THROWS_AS(event_query(date_from_ymd(2022, 5, 5), {"the the"}, {"the"}), error);
    try {
        event_query(date_from_ymd(2022, 5, 5), {"the"}, {"the"});
        FAIL("expected empty_day");
    } catch (const error& e) {
        CHECK(e.code() == errc::empty_day);
    }
}
