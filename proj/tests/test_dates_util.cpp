#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <set>

#include "netlens/dates.hpp"
#include "netlens/errors.hpp"
#include "netlens/rng.hpp"
#include "netlens/util.hpp"

using namespace netlens;

TEST_CASE("week_monday snaps to the Monday of the ISO week") {
    // 2021-02-09 was a Tuesday.
    CHECK(week_monday(date_from_ymd(2021, 2, 9)) == date_from_ymd(2021, 2, 8));
    CHECK(week_monday(date_from_ymd(2021, 2, 8)) == date_from_ymd(2021, 2, 8));
    CHECK(week_monday(date_from_ymd(2021, 2, 14)) == date_from_ymd(2021, 2, 8));  // Sunday
    CHECK(week_monday(date_from_ymd(2021, 1, 1)) == date_from_ymd(2020, 12, 28));
}

TEST_CASE("date and month formatting round-trips") {
    Date d = date_from_ymd(2022, 4, 22);
    CHECK(to_iso_date(d) == "2022-04-22");
    CHECK(parse_iso_date("2022-04-22") == d);
    CHECK(to_iso_month(month_of(d)) == "2022-04");
    CHECK(parse_iso_month("2022-04") == month_of(d));
    CHECK(first_day(month_of(d)) == date_from_ymd(2022, 4, 1));
    CHECK(last_day(month_of(d)) == date_from_ymd(2022, 4, 30));
    CHECK(to_iso_datetime(1612137600) == "2021-02-01T00:00:00Z");
    CHECK_THROWS_AS(parse_iso_date("2022/04/22"), error);
}

TEST_CASE("epoch conversion lands on the UTC day") {
    CHECK(date_from_epoch_seconds(1612137600) == date_from_ymd(2021, 2, 1));
    CHECK(date_from_epoch_seconds(1612137600 + 86399) == date_from_ymd(2021, 2, 1));
    CHECK(date_from_epoch_seconds(1612137600 + 86400) == date_from_ymd(2021, 2, 2));
}

TEST_CASE("format_double survives the round trip") {
    Rng rng(7);
    for (int i = 0; i < 2000; ++i) {
        double v = (rng.uniform() - 0.5) * std::pow(10.0, double(rng.range(-3, 6)));
        CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
    }
    CHECK(format_double(105.4) == "105.4");
    CHECK(format_double(0.75) == "0.75");
}

TEST_CASE("fnv1a64 matches the reference offset basis") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") != fnv1a64("b"));
    CHECK(hex64(0xcbf29ce484222325ULL) == "cbf29ce484222325");
}

TEST_CASE("csv escaping round-trips through the splitter") {
    Rng rng(11);
    const char alphabet[] = {'a', 'b', ',', '"', ' ', 'x'};
    for (int i = 0; i < 500; ++i) {
        std::string field;
        for (int k = int(rng.below(8)); k > 0; --k)
            field.push_back(alphabet[rng.below(sizeof(alphabet))]);
        std::string other = "plain";
        auto fields = split_csv_line(csv_escape(field) + ',' + other);
        REQUIRE(fields.size() == 2);
        CHECK(fields[0] == field);
        CHECK(fields[1] == other);
    }
}

TEST_CASE("sampling without replacement is deterministic and uniform-ish") {
    Rng a(99), b(99);
    auto s1 = sample_indices(50, 10, a);
    auto s2 = sample_indices(50, 10, b);
    CHECK(s1 == s2);
    std::set<std::size_t> unique(s1.begin(), s1.end());
    CHECK(unique.size() == 10);
    Rng c(99);
    CHECK(sample_indices(5, 10, c).size() == 5);  // k capped at n
}
