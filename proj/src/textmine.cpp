#include "netlens/textmine.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "netlens/errors.hpp"
#include "netlens/util.hpp"

namespace netlens::textmine {

namespace {

bool is_word_char(unsigned char c) { return std::isalnum(c) != 0; }

}  // namespace

TokenStream tokenize_filter(const std::string& text, const StopwordSet& stopwords) {
    TokenStream out;
    std::string cur;
    auto flush = [&] {
        // Apostrophes are kept only between alphanumerics, so a token can
        // still end up with none at its edges.
        if (cur.size() >= 2 && !stopwords.count(cur)) out.push_back(cur);
        cur.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (is_word_char(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (c == '\'' && !cur.empty() && i + 1 < text.size() &&
                   is_word_char(static_cast<unsigned char>(text[i + 1]))) {
            cur.push_back('\'');
        } else {
            flush();
        }
    }
    flush();
    return out;
}

NGramCounts ngram_counts(const std::vector<TokenStream>& docs, int n) {
    if (n < 1) throw error(errc::config_error, "n must be >= 1");
    NGramCounts result;
    result.n = n;
    for (const auto& doc : docs) {
        if (doc.size() < static_cast<std::size_t>(n)) continue;
        for (std::size_t i = 0; i + n <= doc.size(); ++i) {
            std::string gram = doc[i];
            for (int j = 1; j < n; ++j) {
                gram += ' ';
                gram += doc[i + j];
            }
            ++result.counts[gram];
        }
    }
    return result;
}

std::vector<std::pair<std::string, std::size_t>> word_cloud(const NGramCounts& counts,
                                                            std::size_t k) {
    if (k < 1) throw error(errc::config_error, "k must be >= 1");
    std::vector<std::pair<std::string, std::size_t>> ranked(counts.counts.begin(),
                                                            counts.counts.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

EventQuery event_query(Date date, const std::vector<std::string>& day_texts,
                       const StopwordSet& stopwords, const std::string& brand) {
    std::vector<TokenStream> docs;
    docs.reserve(day_texts.size());
    for (const auto& text : day_texts) docs.push_back(tokenize_filter(text, stopwords));
    auto unigrams = ngram_counts(docs, 1);
    if (unigrams.counts.empty()) throw error(errc::empty_day, to_iso_date(date));

    EventQuery q;
    q.date = date;
    for (const auto& [term, freq] : word_cloud(unigrams, 3)) {
        (void)freq;
        q.keywords.push_back(term);
    }
    for (const auto& kw : q.keywords) {
        q.query += kw;
        q.query += ' ';
    }
    q.query += brand;
    q.query += ' ';
    q.query += to_iso_date(date);
    return q;
}

StopwordSet load_stopwords(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw error(errc::config_error, "cannot open stopword file " + file.string());
    StopwordSet set;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n' || line.back() == ' '))
            line.pop_back();
        if (!line.empty()) set.insert(to_lower(line));
    }
    return set;
}

}  // namespace netlens::textmine
