#include "netlens/sentiment.hpp"

#include <cstdlib>
#include <fstream>

#include "netlens/errors.hpp"
#include "netlens/textmine.hpp"
#include "netlens/util.hpp"

namespace netlens::sentiment {

const char* strong_label_name(StrongLabel l) {
    switch (l) {
        case StrongLabel::strong_pos: return "STRONG_POS";
        case StrongLabel::strong_neg: return "STRONG_NEG";
        case StrongLabel::none: return "NONE";
    }
    return "NONE";
}

Lexicon default_negators(Lexicon lex) {
    lex.negators = {"not",    "no",      "never",   "don't",   "won't",   "can't",
                    "cannot", "isn't",   "wasn't",  "didn't",  "doesn't", "aren't",
                    "ain't",  "haven't", "wouldn't", "couldn't", "shouldn't"};
    return lex;
}

LexiconLoadResult load_lexicon(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw error(errc::config_error, "cannot open lexicon file " + file.string());
    LexiconLoadResult result;
    result.lexicon = default_negators({});
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_csv_line(line);
        auto skip = [&](const std::string& why) {
            result.warnings.push_back("line " + std::to_string(lineno) + ": " + why);
        };
        if (fields.size() < 2) {
            skip("expected term,polarity[,weight]");
            continue;
        }
        std::string term = to_lower(fields[0]);
        auto tokens = textmine::tokenize_filter(term, {});
        if (tokens.size() != 1 || tokens[0] != term) {
            skip("term '" + fields[0] + "' is not a single lowercase token");
            continue;
        }
        int polarity = std::atoi(fields[1].c_str());
        if (polarity != 1 && polarity != -1) {
            skip("polarity must be +1 or -1");
            continue;
        }
        double weight = 1.0;
        if (fields.size() >= 3 && !fields[2].empty()) weight = std::strtod(fields[2].c_str(), nullptr);
        if (!(weight > 0)) {
            skip("weight must be > 0");
            continue;
        }
        if (result.lexicon.negators.count(term)) {
            skip("term '" + term + "' collides with a negator");
            continue;
        }
        (polarity > 0 ? result.lexicon.positive : result.lexicon.negative)[term] = weight;
    }
    if (result.lexicon.positive.empty() && result.lexicon.negative.empty())
        throw error(errc::no_valid_entries, file.string());
    return result;
}

SentimentScore score_text(const std::string& text, const Lexicon& lexicon) {
    auto tokens = textmine::tokenize_filter(text, {});
    double pos = 0.0, neg = 0.0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const std::string& tok = tokens[i];
        double weight = 0.0;
        bool is_positive = false;
        if (auto it = lexicon.positive.find(tok); it != lexicon.positive.end()) {
            weight = it->second;
            is_positive = true;
        } else if (auto it2 = lexicon.negative.find(tok); it2 != lexicon.negative.end()) {
            weight = it2->second;
        } else {
            continue;
        }
        bool negated = false;
        for (int back = 1; back <= lexicon.negation_window && back <= static_cast<int>(i); ++back) {
            if (lexicon.negators.count(tokens[i - back])) {
                negated = true;
                break;
            }
        }
        if (negated) is_positive = !is_positive;
        (is_positive ? pos : neg) += weight;
    }
    double denom = pos + neg + 1.0;
    return SentimentScore{pos / denom, neg / denom, 1.0 / denom};
}

StrongLabel classify_strong(const SentimentScore& score, double tau) {
    if (!(tau > 0.5) || !(tau <= 1.0))
        throw error(errc::invalid_threshold, "tau must be in (0.5, 1]");
    if (score.positive >= tau) return StrongLabel::strong_pos;
    if (score.negative >= tau) return StrongLabel::strong_neg;
    return StrongLabel::none;
}

PosScore pos_score(Month month, const std::vector<StrongLabel>& labels) {
    PosScore ps;
    ps.month = month;
    for (auto l : labels) {
        if (l == StrongLabel::strong_pos) ++ps.strong_pos;
        else if (l == StrongLabel::strong_neg) ++ps.strong_neg;
    }
    if (ps.strong_pos + ps.strong_neg > 0)
        ps.pos = static_cast<double>(ps.strong_pos) /
                 static_cast<double>(ps.strong_pos + ps.strong_neg);
    return ps;
}

BatchResult score_batch(const std::vector<std::string>& texts, Provider& provider) {
    BatchResult result;
    result.scores.resize(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        try {
            result.scores[i] = provider.score(texts[i]);
        } catch (const std::exception& e) {
            result.errors.push_back({i, e.what()});
        }
    }
    return result;
}

}  // namespace netlens::sentiment
