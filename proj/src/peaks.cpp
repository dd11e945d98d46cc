#include "netlens/peaks.hpp"

#include <algorithm>
#include <cstdlib>

#include <json.hpp>

#include "netlens/errors.hpp"

namespace netlens::peaks {

DailySeries daily_strong_counts(Date start, Date end, const std::vector<LabeledDay>& items) {
    if (end < start) throw error(errc::config_error, "series end before start");
    DailySeries s;
    s.start = start;
    s.end = end;
    s.pos_counts.assign(s.span(), 0);
    s.neg_counts.assign(s.span(), 0);
    for (const auto& item : items) {
        if (item.date < start || end < item.date) continue;
        auto idx = static_cast<std::size_t>(item.date.days - start.days);
        if (item.label == sentiment::StrongLabel::strong_pos) ++s.pos_counts[idx];
        else if (item.label == sentiment::StrongLabel::strong_neg) ++s.neg_counts[idx];
    }
    return s;
}

std::vector<Peak> top_peaks(const DailySeries& series, std::size_t k, int min_separation_days) {
    if (k < 1) throw error(errc::config_error, "k must be >= 1");
    struct Entry {
        Date date;
        Polarity polarity;
        std::size_t count;
    };
    std::vector<Entry> entries;
    for (std::size_t i = 0; i < series.span(); ++i) {
        Date d = add_days(series.start, static_cast<int>(i));
        if (series.pos_counts[i] > 0) entries.push_back({d, Polarity::positive, series.pos_counts[i]});
        if (series.neg_counts[i] > 0) entries.push_back({d, Polarity::negative, series.neg_counts[i]});
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.count != b.count) return a.count > b.count;
        if (a.date != b.date) return a.date < b.date;
        return a.polarity == Polarity::positive && b.polarity == Polarity::negative;
    });

    std::vector<Peak> selected;
    for (const auto& e : entries) {
        if (selected.size() >= k) break;
        bool far_enough = std::all_of(selected.begin(), selected.end(), [&](const Peak& p) {
            return std::abs(days_between(p.date, e.date)) >= min_separation_days;
        });
        if (far_enough) selected.push_back(Peak{e.date, e.polarity, e.count, std::nullopt});
    }
    return selected;
}

std::vector<Peak> annotate_peaks(std::vector<Peak> peaks, const DayTexts& day_texts,
                                 const textmine::StopwordSet& stopwords, const std::string& brand,
                                 std::size_t cloud_k) {
    for (auto& peak : peaks) {
        auto texts = day_texts.texts_on(peak.date);
        try {
            PeakAnnotation ann;
            ann.query = textmine::event_query(peak.date, texts, stopwords, brand);
            std::vector<textmine::TokenStream> docs;
            docs.reserve(texts.size());
            for (const auto& t : texts) docs.push_back(textmine::tokenize_filter(t, stopwords));
            ann.cloud = textmine::word_cloud(textmine::ngram_counts(docs, 1), cloud_k);
            peak.annotation = std::move(ann);
        } catch (const error& e) {
            if (e.code() != errc::empty_day) throw;
            // Peak stays, annotation absent.
        }
    }
    return peaks;
}

std::string daily_series_csv(const DailySeries& series) {
    std::string out = "date,strong_pos,strong_neg\n";
    for (std::size_t i = 0; i < series.span(); ++i) {
        out += to_iso_date(add_days(series.start, static_cast<int>(i)));
        out += ',' + std::to_string(series.pos_counts[i]);
        out += ',' + std::to_string(series.neg_counts[i]);
        out += '\n';
    }
    return out;
}

std::string peaks_json(const std::vector<Peak>& peaks) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : peaks) {
        nlohmann::json j;
        j["date"] = to_iso_date(p.date);
        j["polarity"] = p.polarity == Polarity::positive ? "POSITIVE" : "NEGATIVE";
        j["count"] = p.count;
        if (p.annotation) {
            j["keywords"] = p.annotation->query.keywords;
            j["query"] = p.annotation->query.query;
            nlohmann::json cloud = nlohmann::json::array();
            for (const auto& [term, freq] : p.annotation->cloud)
                cloud.push_back({{"term", term}, {"count", freq}});
            j["cloud"] = std::move(cloud);
        }
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

}  // namespace netlens::peaks
