#include <doctest.h>

#include <filesystem>
#include <unordered_map>

#include "netlens/errors.hpp"
#include "netlens/outage.hpp"
#include "netlens/rng.hpp"
#include "netlens/util.hpp"

using namespace netlens;
using namespace netlens::outage;

namespace {

KeywordLibrary small_library() {
    KeywordLibrary lib;
    lib.unigrams = {"outage", "offline"};
    lib.bigrams = {"no service"};
    return lib;
}

corpus::Post mk_post(const std::string& id, std::int64_t ts, const std::string& title,
                     const std::string& body) {
    corpus::Post p;
    p.id = id;
    p.created_utc = ts;
    p.title = title;
    p.body = body;
    return p;
}

corpus::Thread mk_thread(corpus::Post root, std::vector<corpus::Comment> comments = {}) {
    corpus::Thread t;
    t.root = std::move(root);
    for (auto& c : comments) t.children.push_back({std::move(c), {}});
    return t;
}

corpus::Comment mk_comment(const std::string& id, const std::string& post, std::int64_t ts,
                           const std::string& body) {
    corpus::Comment c;
    c.id = id;
    c.parent_id = post;
    c.post_id = post;
    c.created_utc = ts;
    c.body = body;
    return c;
}

struct Scores {
    std::unordered_map<std::string, sentiment::SentimentScore> map;
    ScoreLookup lookup() {
        return [this](const std::string& id) -> const sentiment::SentimentScore* {
            auto it = map.find(id);
            return it == map.end() ? nullptr : &it->second;
        };
    }
};

}  // namespace

TEST_CASE("keyword hits count unigram occurrences and adjacent bigrams") {
    auto lib = small_library();
    std::vector<std::string> matched;
    CHECK(count_keyword_hits({"total", "outage", "again", "outage"}, lib, &matched) == 2);
    CHECK(matched == std::vector<std::string>{"outage", "outage"});

    CHECK(count_keyword_hits({"no", "service", "here"}, lib) == 1);
    // Bigrams require adjacency in the filtered stream.
    CHECK(count_keyword_hits({"no", "cell", "service"}, lib) == 0);
    CHECK(count_keyword_hits({"fine", "today"}, lib) == 0);
}

TEST_CASE("mine_keywords ranks by frequency lift against the corpus") {
    // Seed: "outage" in 9 of 10 docs; corpus barely mentions it. A term
    // equally common in both scores near 1 and ranks below.
    std::vector<textmine::TokenStream> seed, corpus_docs;
    for (int i = 0; i < 10; ++i) {
        textmine::TokenStream doc{"dish", "slow"};
        if (i < 9) doc.push_back("outage");
        seed.push_back(doc);
    }
    for (int i = 0; i < 100; ++i) {
        textmine::TokenStream doc{"dish"};
        if (i < 10) doc.push_back("slow");
        if (i < 1) doc.push_back("outage");
        corpus_docs.push_back(doc);
    }
    auto mined = mine_keywords(seed, corpus_docs, 30);
    REQUIRE_FALSE(mined.unigrams.empty());
    CHECK(mined.unigrams[0].term == "outage");
    // Hand-computed lift: seed 9, corpus 1 -> 9/(1+1) = 4.5.
    CHECK(mined.unigrams[0].lift == doctest::Approx(4.5));
    // "dish" appears everywhere: lift 10/101, far down the ranking.
    for (const auto& k : mined.unigrams)
        if (k.term == "dish") CHECK(k.lift < 0.2);
    CHECK(mined.candidates.provenance.at("outage") == KeywordSource::mined);

    CHECK_THROWS_AS(mine_keywords({}, corpus_docs, 30), error);
}

TEST_CASE("load_library validates entries against the stop list") {
    auto dir = std::filesystem::temp_directory_path() / "netlens-test-lib";
    std::filesystem::create_directories(dir);
    write_file(dir / "lib.txt", "# comment\noutage\ndown\nno service\nTHE\none two three\n");
    textmine::StopwordSet stops{"the"};
    auto loaded = load_library(dir / "lib.txt", stops);
    CHECK(loaded.library.unigrams == std::set<std::string>{"outage", "down"});
    CHECK(loaded.library.bigrams == std::set<std::string>{"no service"});
    CHECK(loaded.library.provenance.at("no service") == KeywordSource::seed_file);
    CHECK(loaded.warnings.size() == 2);  // stop-word line and trigram line

    write_file(dir / "empty.txt", "# nothing here\n");
    CHECK_THROWS_AS(load_library(dir / "empty.txt", stops), error);

    auto shipped = load_library(std::filesystem::path(NETLENS_DATA_DIR) / "outage_keywords.txt",
                                textmine::load_stopwords(std::filesystem::path(NETLENS_DATA_DIR) /
                                                         "stopwords_en.txt"));
    CHECK(shipped.warnings.empty());
    CHECK(shipped.library.unigrams.count("outage"));
    CHECK(shipped.library.bigrams.count("no service"));
}

TEST_CASE("qualify_threads pairs keyword matches with negative sentiment") {
    auto lib = small_library();
    Scores scores;
    scores.map["P"] = {0.1, 0.2, 0.7};
    scores.map["c1"] = {0.1, 0.8, 0.1};
    auto thread = mk_thread(mk_post("P", 100, "slow day", "nothing here"),
                            {mk_comment("c1", "P", 200, "total outage again")});
    auto qualified = qualify_threads({thread}, lib, scores.lookup(), {});
    REQUIRE(qualified.size() == 1);
    CHECK(qualified[0].matched == std::set<std::string>{"outage"});
    REQUIRE(qualified[0].items.size() == 1);
    CHECK(qualified[0].items[0].item_id == "c1");
    CHECK(qualified[0].items[0].keyword_hits == 1);
}

TEST_CASE("positive keyword mentions are filtered out") {
    auto lib = small_library();
    Scores scores;
    scores.map["P"] = {0.2, 0.1, 0.7};
    scores.map["c1"] = {0.8, 0.1, 0.1};
    auto happy = mk_thread(mk_post("P", 100, "update", "all good"),
                           {mk_comment("c1", "P", 200, "outage resolved, so happy")});
    CHECK(qualify_threads({happy}, lib, scores.lookup(), {}).empty());

    // Negative items without keywords qualify nothing either.
    Scores neg;
    neg.map["P"] = {0.1, 0.8, 0.1};
    auto keywordless = mk_thread(mk_post("P", 100, "ugh", "this is awful today"));
    CHECK(qualify_threads({keywordless}, lib, neg.lookup(), {}).empty());

    // Unscored items never qualify.
    Scores empty;
    auto unscored = mk_thread(mk_post("P", 100, "outage", "outage outage"));
    CHECK(qualify_threads({unscored}, lib, empty.lookup(), {}).empty());
}

TEST_CASE("strong-only mode tightens the sentiment gate") {
    auto lib = small_library();
    Scores scores;
    scores.map["P"] = {0.2, 0.6, 0.2};  // negative-leaning but not strong
    auto thread = mk_thread(mk_post("P", 100, "outage", "outage here"));
    CHECK_FALSE(qualify_threads({thread}, lib, scores.lookup(), {}).empty());
    CHECK(qualify_threads({thread}, lib, scores.lookup(), {},
                          QualifyMode::strong_negative_only)
              .empty());
    scores.map["P"] = {0.1, 0.8, 0.1};
    CHECK_FALSE(qualify_threads({thread}, lib, scores.lookup(), {},
                                QualifyMode::strong_negative_only)
                    .empty());
}

TEST_CASE("adding keywords never un-qualifies a thread") {
    Rng rng(73);
    const std::vector<std::string> vocab = {"outage", "offline", "slow", "dish", "fine"};
    for (int round = 0; round < 60; ++round) {
        std::vector<corpus::Thread> threads;
        Scores scores;
        for (int t = 0; t < 5; ++t) {
            std::string id = "P" + std::to_string(t);
            std::string body;
            for (int w = 0; w < 6; ++w) body += vocab[rng.below(vocab.size())] + " ";
            scores.map[id] = rng.uniform() < 0.5 ? sentiment::SentimentScore{0.1, 0.6, 0.3}
                                                 : sentiment::SentimentScore{0.6, 0.1, 0.3};
            threads.push_back(mk_thread(mk_post(id, 100 + t, "t", body)));
        }
        KeywordLibrary small;
        small.unigrams = {"outage"};
        KeywordLibrary big;
        big.unigrams = {"outage", "offline", "slow"};
        auto before = qualify_threads(threads, small, scores.lookup(), {});
        auto after = qualify_threads(threads, big, scores.lookup(), {});
        std::set<std::string> before_ids, after_ids;
        for (const auto& q : before) before_ids.insert(q.post_id);
        for (const auto& q : after) after_ids.insert(q.post_id);
        for (const auto& id : before_ids) CHECK(after_ids.count(id) == 1);
    }
}

TEST_CASE("keyword_day_series sums per-item hits by day") {
    Date start = date_from_ymd(2022, 1, 1);
    QualifiedThread qt;
    qt.post_id = "P";
    qt.items = {{"a", start, 1, {}}, {"b", start, 2, {}}, {"c", start, 1, {}},
                {"d", add_days(start, 3), 2, {}}};
    auto series = keyword_day_series({qt}, start, add_days(start, 9));
    CHECK(series.counts[0] == 4);
    CHECK(series.counts[1] == 0);
    CHECK(series.counts[3] == 2);

    auto empty = keyword_day_series({}, start, add_days(start, 9));
    CHECK(empty.counts == std::vector<std::size_t>(10, 0));

    // Total equals the sum of per-item hits inside the window.
    std::size_t total = 0;
    for (auto c : series.counts) total += c;
    CHECK(total == 6);
}

TEST_CASE("flag_spikes marks outliers over the trailing window") {
    OutageSeries s;
    s.start = date_from_ymd(2022, 1, 1);

    // 27 quiet days then a burst: mean 1, stddev 0, so the burst flags.
    s.counts.assign(27, 1);
    s.counts.push_back(40);
    s.end = add_days(s.start, static_cast<int>(s.counts.size()) - 1);
    s.flagged.assign(s.counts.size(), false);
    auto flagged = flag_spikes(s);
    CHECK(flagged.flagged.back());
    for (std::size_t i = 0; i + 1 < flagged.span(); ++i) CHECK_FALSE(flagged.flagged[i]);

    // A constant series never exceeds its own mean.
    OutageSeries constant;
    constant.start = s.start;
    constant.counts.assign(40, 10);
    constant.end = add_days(constant.start, 39);
    constant.flagged.assign(40, false);
    auto no_flags = flag_spikes(constant);
    for (auto f : no_flags.flagged) CHECK_FALSE(f);

    // Below min_count stays unflagged even over a zero baseline.
    OutageSeries low;
    low.start = s.start;
    low.counts.assign(20, 0);
    low.counts[15] = 4;
    low.end = add_days(low.start, 19);
    low.flagged.assign(20, false);
    auto still = flag_spikes(low);
    for (auto f : still.flagged) CHECK_FALSE(f);

    OutageSeries tiny;
    tiny.start = s.start;
    tiny.counts.assign(7, 1);
    tiny.end = add_days(tiny.start, 6);
    tiny.flagged.assign(7, false);
    CHECK_THROWS_AS(flag_spikes(tiny), error);
}

TEST_CASE("early days lack history and are never flagged") {
    OutageSeries s;
    s.start = date_from_ymd(2022, 1, 1);
    s.counts = {50, 50, 0, 0, 0, 0, 0, 0, 0, 0};
    s.end = add_days(s.start, 9);
    s.flagged.assign(10, false);
    auto flagged = flag_spikes(s);
    for (auto f : flagged.flagged) CHECK_FALSE(f);
}

TEST_CASE("a corpus without negative items qualifies nothing") {
    Rng rng(79);
    auto lib = small_library();
    for (int round = 0; round < 30; ++round) {
        std::vector<corpus::Thread> threads;
        Scores scores;
        for (int t = 0; t < 6; ++t) {
            std::string id = "P" + std::to_string(t);
            double p = 0.3 + rng.uniform() * 0.6;
            scores.map[id] = {p, (1 - p) * 0.4, (1 - p) * 0.6};  // positive-leaning
            threads.push_back(mk_thread(mk_post(id, t, "t", "outage offline no service")));
        }
        CHECK(qualify_threads(threads, lib, scores.lookup(), {}).empty());
    }
}
