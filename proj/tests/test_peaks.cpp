#include <doctest.h>

#include <map>

#include "netlens/peaks.hpp"
#include "netlens/rng.hpp"

using namespace netlens;
using namespace netlens::peaks;
using netlens::sentiment::StrongLabel;

namespace {

DailySeries series_of(Date start, const std::vector<std::size_t>& pos,
                      const std::vector<std::size_t>& neg) {
    DailySeries s;
    s.start = start;
    s.end = add_days(start, static_cast<int>(pos.size()) - 1);
    s.pos_counts = pos;
    s.neg_counts = neg;
    return s;
}

class MapDayTexts : public DayTexts {
public:
    std::map<Date, std::vector<std::string>> texts;
    std::vector<std::string> texts_on(Date d) const override {
        auto it = texts.find(d);
        return it == texts.end() ? std::vector<std::string>{} : it->second;
    }
};

}  // namespace

TEST_CASE("daily_strong_counts bins labeled items into the window") {
    Date start = date_from_ymd(2021, 3, 1);
    std::vector<LabeledDay> items = {
        {start, StrongLabel::strong_pos},
        {start, StrongLabel::strong_pos},
        {start, StrongLabel::strong_neg},
        {add_days(start, 1), StrongLabel::none},
    };
    auto s = daily_strong_counts(start, add_days(start, 9), items);
    CHECK(s.span() == 10);
    CHECK(s.pos_counts[0] == 2);
    CHECK(s.neg_counts[0] == 1);
    CHECK(s.pos_counts[1] == 0);  // NONE items count nowhere

    auto empty = daily_strong_counts(start, add_days(start, 9), {});
    CHECK(empty.pos_counts == std::vector<std::size_t>(10, 0));
    CHECK(empty.neg_counts == std::vector<std::size_t>(10, 0));
}

TEST_CASE("series totals equal the strong item counts inside the window") {
    Rng rng(57);
    Date start = date_from_ymd(2021, 6, 1);
    Date end = add_days(start, 29);
    std::vector<LabeledDay> items;
    std::size_t strong_pos = 0, strong_neg = 0;
    for (int i = 0; i < 400; ++i) {
        Date d = add_days(start, static_cast<int>(rng.below(40)) - 5);  // some outside
        StrongLabel label = StrongLabel::none;
        switch (rng.below(3)) {
            case 0: label = StrongLabel::strong_pos; break;
            case 1: label = StrongLabel::strong_neg; break;
            default: break;
        }
        if (start <= d && d <= end) {
            strong_pos += label == StrongLabel::strong_pos;
            strong_neg += label == StrongLabel::strong_neg;
        }
        items.push_back({d, label});
    }
    auto s = daily_strong_counts(start, end, items);
    std::size_t pos_total = 0, neg_total = 0;
    for (auto v : s.pos_counts) pos_total += v;
    for (auto v : s.neg_counts) neg_total += v;
    CHECK(pos_total == strong_pos);
    CHECK(neg_total == strong_neg);
}

TEST_CASE("top_peaks applies the greedy separation rule") {
    Date start = date_from_ymd(2021, 5, 1);
    // Hand-run: candidates sorted (day2,NEG,9), (day1,POS,5), (day3,POS,3);
    // with separation 2 both later days sit 1 day from an accepted one.
    auto s = series_of(start, {0, 5, 0, 3}, {0, 0, 9, 0});
    auto picked = top_peaks(s, 3, 2);
    REQUIRE(picked.size() == 1);
    CHECK(picked[0].date == add_days(start, 2));
    CHECK(picked[0].polarity == Polarity::negative);
    CHECK(picked[0].count == 9);

    auto loose = top_peaks(s, 3, 1);
    REQUIRE(loose.size() == 3);
    CHECK(loose[0].date == add_days(start, 2));
    CHECK(loose[1].date == add_days(start, 1));
    CHECK(loose[1].polarity == Polarity::positive);
    CHECK(loose[2].date == add_days(start, 3));
    CHECK(loose[2].count == 3);

    CHECK(top_peaks(series_of(start, {0, 0}, {0, 0}), 3).empty());
}

TEST_CASE("tied counts break by earlier date then positive first") {
    Date start = date_from_ymd(2021, 5, 1);
    auto s = series_of(start, {0, 4, 0, 0}, {4, 0, 0, 4});
    auto picked = top_peaks(s, 3, 0);
    REQUIRE(picked.size() == 3);
    CHECK(picked[0].date == start);                 // earliest among ties
    CHECK(picked[0].polarity == Polarity::negative);
    CHECK(picked[1].date == add_days(start, 1));
    CHECK(picked[1].polarity == Polarity::positive);
    CHECK(picked[2].date == add_days(start, 3));

    auto both = series_of(start, {7, 0, 0, 0}, {7, 0, 0, 0});
    auto tie = top_peaks(both, 2, 0);
    REQUIRE(tie.size() == 2);
    CHECK(tie[0].polarity == Polarity::positive);  // positive before negative
    CHECK(tie[1].polarity == Polarity::negative);
}

TEST_CASE("top_peaks counts never increase along the selection") {
    Rng rng(61);
    for (int round = 0; round < 100; ++round) {
        std::vector<std::size_t> pos(30), neg(30);
        for (auto& v : pos) v = rng.below(10);
        for (auto& v : neg) v = rng.below(10);
        auto picked = top_peaks(series_of(date_from_ymd(2022, 1, 1), pos, neg), 8,
                                static_cast<int>(rng.below(4)));
        for (std::size_t i = 1; i < picked.size(); ++i)
            CHECK(picked[i - 1].count >= picked[i].count);
    }
}

TEST_CASE("zero separation with unbounded k yields every nonzero day") {
    Rng rng(67);
    std::vector<std::size_t> pos(20), neg(20);
    for (auto& v : pos) v = rng.below(4);
    for (auto& v : neg) v = rng.below(4);
    auto s = series_of(date_from_ymd(2022, 2, 1), pos, neg);
    auto all = top_peaks(s, 100000, 0);
    std::size_t nonzero = 0;
    for (auto v : pos) nonzero += v > 0;
    for (auto v : neg) nonzero += v > 0;
    CHECK(all.size() == nonzero);
}

TEST_CASE("selection is invariant under count scaling") {
    Rng rng(71);
    std::vector<std::size_t> pos(25), neg(25);
    for (auto& v : pos) v = rng.below(8);
    for (auto& v : neg) v = rng.below(8);
    auto base = series_of(date_from_ymd(2022, 3, 1), pos, neg);
    auto scaled = base;
    for (auto& v : scaled.pos_counts) v *= 17;
    for (auto& v : scaled.neg_counts) v *= 17;
    auto a = top_peaks(base, 5, 2);
    auto b = top_peaks(scaled, 5, 2);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].date == b[i].date);
        CHECK(a[i].polarity == b[i].polarity);
    }
}

TEST_CASE("annotate_peaks attaches clouds and queries, tolerating empty days") {
    Date d1 = date_from_ymd(2021, 2, 9);
    Date d2 = date_from_ymd(2021, 2, 20);
    MapDayTexts texts;
    for (int i = 0; i < 6; ++i) texts.texts[d1].push_back("preorder preorder terminal");
    texts.texts[d2] = {"the of and"};  // nothing survives filtering

    std::vector<Peak> peaks = {{d1, Polarity::positive, 6, std::nullopt},
                               {d2, Polarity::negative, 3, std::nullopt}};
    auto annotated =
        annotate_peaks(peaks, texts, {"the", "of", "and"});
    REQUIRE(annotated.size() == 2);
    REQUIRE(annotated[0].annotation.has_value());
    CHECK(annotated[0].annotation->query.keywords[0] == "preorder");
    CHECK(annotated[0].annotation->cloud[0].first == "preorder");
    CHECK(annotated[0].annotation->cloud[0].second == 12);
    // Peak retained, annotation absent.
    CHECK_FALSE(annotated[1].annotation.has_value());

    // Two same-polarity peaks annotate independently.
    MapDayTexts two;
    Date d3 = date_from_ymd(2021, 3, 1), d4 = date_from_ymd(2021, 3, 9);
    two.texts[d3] = {"alpha alpha"};
    two.texts[d4] = {"beta beta"};
    auto pair = annotate_peaks({{d3, Polarity::negative, 2, std::nullopt},
                                {d4, Polarity::negative, 2, std::nullopt}},
                               two, {});
    CHECK(pair[0].annotation->query.keywords[0] == "alpha");
    CHECK(pair[1].annotation->query.keywords[0] == "beta");
}

TEST_CASE("series and peaks serialize to the published formats") {
    auto s = series_of(date_from_ymd(2021, 1, 1), {1, 0}, {0, 2});
    CHECK(daily_series_csv(s) ==
          "date,strong_pos,strong_neg\n2021-01-01,1,0\n2021-01-02,0,2\n");
    auto j = peaks_json({{date_from_ymd(2021, 1, 2), Polarity::negative, 2, std::nullopt}});
    CHECK(j.find("\"2021-01-02\"") != std::string::npos);
    CHECK(j.find("NEGATIVE") != std::string::npos);
}
