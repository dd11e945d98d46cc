#include "netlens/outage.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "netlens/errors.hpp"
#include "netlens/util.hpp"

namespace netlens::outage {

namespace {

std::map<std::string, std::size_t> gram_counts(const std::vector<textmine::TokenStream>& docs,
                                               int n) {
    return textmine::ngram_counts(docs, n).counts;
}

std::vector<MinedKeyword> rank_by_lift(const std::map<std::string, std::size_t>& seed,
                                       const std::map<std::string, std::size_t>& corpus,
                                       std::size_t top_m) {
    std::vector<MinedKeyword> ranked;
    ranked.reserve(seed.size());
    for (const auto& [term, count] : seed) {
        std::size_t background = 0;
        if (auto it = corpus.find(term); it != corpus.end()) background = it->second;
        ranked.push_back({term, static_cast<double>(count) / static_cast<double>(background + 1),
                          count, background});
    }
    std::sort(ranked.begin(), ranked.end(), [](const MinedKeyword& a, const MinedKeyword& b) {
        if (a.lift != b.lift) return a.lift > b.lift;
        return a.term < b.term;
    });
    if (ranked.size() > top_m) ranked.resize(top_m);
    return ranked;
}

}  // namespace

MiningResult mine_keywords(const std::vector<textmine::TokenStream>& seed_docs,
                           const std::vector<textmine::TokenStream>& corpus_docs,
                           std::size_t top_m) {
    if (seed_docs.empty()) throw error(errc::empty_seed, "no seed documents");
    MiningResult result;
    result.unigrams = rank_by_lift(gram_counts(seed_docs, 1), gram_counts(corpus_docs, 1), top_m);
    result.bigrams = rank_by_lift(gram_counts(seed_docs, 2), gram_counts(corpus_docs, 2), top_m);
    for (const auto& k : result.unigrams) {
        result.candidates.unigrams.insert(k.term);
        result.candidates.provenance[k.term] = KeywordSource::mined;
    }
    for (const auto& k : result.bigrams) {
        result.candidates.bigrams.insert(k.term);
        result.candidates.provenance[k.term] = KeywordSource::mined;
    }
    return result;
}

LibraryLoadResult load_library(const std::filesystem::path& file,
                               const textmine::StopwordSet& stopwords) {
    std::ifstream in(file);
    if (!in) throw error(errc::config_error, "cannot open keyword file " + file.string());
    LibraryLoadResult result;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        auto tokens = textmine::tokenize_filter(line, stopwords);
        auto raw_tokens = textmine::tokenize_filter(line, {});
        if (raw_tokens.empty()) continue;  // blank or comment-only line
        auto warn = [&](const std::string& why) {
            result.warnings.push_back("line " + std::to_string(lineno) + ": " + why);
        };
        if (tokens.size() != raw_tokens.size()) {
            warn("'" + line + "' contains a stop-word");
            continue;
        }
        if (tokens.size() == 1) {
            result.library.unigrams.insert(tokens[0]);
            result.library.provenance[tokens[0]] = KeywordSource::seed_file;
        } else if (tokens.size() == 2) {
            std::string gram = tokens[0] + ' ' + tokens[1];
            result.library.bigrams.insert(gram);
            result.library.provenance[gram] = KeywordSource::seed_file;
        } else {
            warn("'" + line + "' is not a uni- or bi-gram");
        }
    }
    if (result.library.unigrams.empty() && result.library.bigrams.empty())
        throw error(errc::no_valid_entries, file.string());
    return result;
}

std::size_t count_keyword_hits(const textmine::TokenStream& tokens, const KeywordLibrary& library,
                               std::vector<std::string>* matched) {
    std::size_t hits = 0;
    for (const auto& tok : tokens) {
        if (library.unigrams.count(tok)) {
            ++hits;
            if (matched) matched->push_back(tok);
        }
    }
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
        std::string gram = tokens[i] + ' ' + tokens[i + 1];
        if (library.bigrams.count(gram)) {
            ++hits;
            if (matched) matched->push_back(gram);
        }
    }
    return hits;
}

namespace {

bool leans_negative(const sentiment::SentimentScore& s, QualifyMode mode, double tau) {
    if (mode == QualifyMode::strong_negative_only)
        return sentiment::classify_strong(s, tau) == sentiment::StrongLabel::strong_neg;
    return s.negative > s.positive;
}

}  // namespace

std::vector<QualifiedThread> qualify_threads(const std::vector<corpus::Thread>& threads,
                                             const KeywordLibrary& library,
                                             const ScoreLookup& scores,
                                             const textmine::StopwordSet& stopwords,
                                             QualifyMode mode, double tau) {
    std::vector<QualifiedThread> out;
    for (const auto& thread : threads) {
        QualifiedThread qt;
        qt.post_id = thread.root.id;

        auto consider = [&](const std::string& id, const std::string& text, std::int64_t ts) {
            const sentiment::SentimentScore* score = scores(id);
            if (!score || !leans_negative(*score, mode, tau)) return;
            auto tokens = textmine::tokenize_filter(text, stopwords);
            std::vector<std::string> matched;
            std::size_t hits = count_keyword_hits(tokens, library, &matched);
            if (hits == 0) return;
            QualifiedItem item{id, date_from_epoch_seconds(ts), hits, std::move(matched)};
            for (const auto& m : item.matched) qt.matched.insert(m);
            qt.items.push_back(std::move(item));
        };

        consider(thread.root.id, thread.root.title + ' ' + thread.root.body,
                 thread.root.created_utc);
        // Orphans still carry outage chatter; they are part of the thread.
        std::vector<const corpus::CommentNode*> stack;
        for (const auto& child : thread.children) stack.push_back(&child);
        while (!stack.empty()) {
            const corpus::CommentNode* node = stack.back();
            stack.pop_back();
            consider(node->comment.id, node->comment.body, node->comment.created_utc);
            for (const auto& child : node->children) stack.push_back(&child);
        }
        for (const auto& orphan : thread.orphan_comments)
            consider(orphan.id, orphan.body, orphan.created_utc);

        if (!qt.items.empty()) out.push_back(std::move(qt));
    }
    return out;
}

OutageSeries keyword_day_series(const std::vector<QualifiedThread>& qualified, Date start,
                                Date end) {
    if (end < start) throw error(errc::config_error, "series end before start");
    OutageSeries s;
    s.start = start;
    s.end = end;
    s.counts.assign(s.span(), 0);
    s.flagged.assign(s.span(), false);
    for (const auto& thread : qualified) {
        for (const auto& item : thread.items) {
            if (item.day < start || end < item.day) continue;
            s.counts[static_cast<std::size_t>(item.day.days - start.days)] += item.keyword_hits;
        }
    }
    return s;
}

OutageSeries flag_spikes(OutageSeries series, const SpikeParams& params) {
    if (series.span() < 8) throw error(errc::series_too_short, "need at least 8 days");
    series.flagged.assign(series.span(), false);
    for (std::size_t i = 0; i < series.span(); ++i) {
        std::size_t lo = i > static_cast<std::size_t>(params.window_days)
                             ? i - static_cast<std::size_t>(params.window_days)
                             : 0;
        std::size_t n = i - lo;
        if (n < static_cast<std::size_t>(params.min_history_days)) continue;
        if (series.counts[i] < params.min_count) continue;
        double mean = 0.0;
        for (std::size_t j = lo; j < i; ++j) mean += static_cast<double>(series.counts[j]);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t j = lo; j < i; ++j) {
            double d = static_cast<double>(series.counts[j]) - mean;
            var += d * d;
        }
        var /= static_cast<double>(n);
        double threshold = mean + params.z * std::sqrt(var);
        if (static_cast<double>(series.counts[i]) > threshold) series.flagged[i] = true;
    }
    return series;
}

std::string outage_series_csv(const OutageSeries& series) {
    std::string out = "date,count,flagged\n";
    for (std::size_t i = 0; i < series.span(); ++i) {
        out += to_iso_date(add_days(series.start, static_cast<int>(i)));
        out += ',' + std::to_string(series.counts[i]);
        out += series.flagged[i] ? ",1\n" : ",0\n";
    }
    return out;
}

}  // namespace netlens::outage
