#pragma once

#include <optional>
#include <string>
#include <vector>

#include "netlens/dates.hpp"
#include "netlens/sentiment.hpp"
#include "netlens/textmine.hpp"

namespace netlens::peaks {

/// Day-binned strong-sentiment counts, zero-filled over [start, end].
struct DailySeries {
    Date start;
    Date end;
    std::vector<std::size_t> pos_counts;
    std::vector<std::size_t> neg_counts;

    std::size_t span() const { return static_cast<std::size_t>(end.days - start.days) + 1; }
};

struct LabeledDay {
    Date date;
    sentiment::StrongLabel label;
};

DailySeries daily_strong_counts(Date start, Date end, const std::vector<LabeledDay>& items);

enum class Polarity { positive, negative };

struct PeakAnnotation {
    textmine::EventQuery query;
    std::vector<std::pair<std::string, std::size_t>> cloud;  // top-10 unigrams
};

struct Peak {
    Date date;
    Polarity polarity;
    std::size_t count = 0;
    std::optional<PeakAnnotation> annotation;
};

/// Merge both polarities into one ranking (count desc, ties by earlier date
/// then positive first) and greedily keep entries at least
/// min_separation_days away from everything already kept. May return fewer
/// than k.
std::vector<Peak> top_peaks(const DailySeries& series, std::size_t k,
                            int min_separation_days = 2);

/// Day texts (posts + comments of that date) feed the word cloud and query.
/// A day whose tokens are all filtered out leaves the peak unannotated.
class DayTexts {
public:
    virtual ~DayTexts() = default;
    virtual std::vector<std::string> texts_on(Date d) const = 0;
};

std::vector<Peak> annotate_peaks(std::vector<Peak> peaks, const DayTexts& day_texts,
                                 const textmine::StopwordSet& stopwords,
                                 const std::string& brand = "Starlink",
                                 std::size_t cloud_k = 10);

std::string daily_series_csv(const DailySeries& series);
std::string peaks_json(const std::vector<Peak>& peaks);

}  // namespace netlens::peaks
