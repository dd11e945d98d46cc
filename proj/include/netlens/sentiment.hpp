#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "netlens/dates.hpp"

namespace netlens::sentiment {

/// (positive, negative, neutral), each in [0,1], summing to 1.
struct SentimentScore {
    double positive = 0.0;
    double negative = 0.0;
    double neutral = 1.0;

    bool operator==(const SentimentScore&) const = default;
};

enum class StrongLabel { strong_pos, strong_neg, none };

const char* strong_label_name(StrongLabel l);

/// Polarity lexicon with negation handling. A deterministic, offline scorer;
/// an HTTP-backed provider with the same contract lives in clients.
struct Lexicon {
    std::map<std::string, double> positive;  // term -> weight (> 0)
    std::map<std::string, double> negative;
    std::set<std::string> negators;
    int negation_window = 2;
};

Lexicon default_negators(Lexicon lex);

struct LexiconLoadResult {
    Lexicon lexicon;
    std::vector<std::string> warnings;  // skipped lines with reasons
};

/// CSV term,polarity,weight. polarity is +1/-1; weight optional (default 1).
LexiconLoadResult load_lexicon(const std::filesystem::path& file);

/// Tokenizes (no stop-word removal, so negators survive), matches lexicon
/// terms, flips a match's polarity when a negator appears within the
/// negation window before it, and returns
///   (p/(p+n+1), n/(p+n+1), 1/(p+n+1)).
/// The +1 keeps single-hit texts out of the strong band.
SentimentScore score_text(const std::string& text, const Lexicon& lexicon);

/// Inclusive threshold. Throws error(invalid_threshold) unless tau in (0.5, 1].
StrongLabel classify_strong(const SentimentScore& score, double tau = 0.7);

/// Normalized strong-positive share for one month. pos is unset when the
/// month has no strong items at all; it is never reported as 0 in that case.
struct PosScore {
    Month month;
    std::size_t strong_pos = 0;
    std::size_t strong_neg = 0;
    std::optional<double> pos;
};

PosScore pos_score(Month month, const std::vector<StrongLabel>& labels);

class Provider {
public:
    virtual ~Provider() = default;
    virtual std::string id() const = 0;
    /// Throws error(provider_error) on per-item failure.
    virtual SentimentScore score(const std::string& text) = 0;
};

class LexiconProvider : public Provider {
public:
    explicit LexiconProvider(Lexicon lexicon) : lexicon_(std::move(lexicon)) {}
    std::string id() const override { return "lexicon"; }
    SentimentScore score(const std::string& text) override { return score_text(text, lexicon_); }
    const Lexicon& lexicon() const { return lexicon_; }

private:
    Lexicon lexicon_;
};

struct BatchItemError {
    std::size_t index = 0;
    std::string message;
};

struct BatchResult {
    std::vector<std::optional<SentimentScore>> scores;  // unset for failed items
    std::vector<BatchItemError> errors;
};

/// Order-preserving; failed items stay unscored and are reported per index.
BatchResult score_batch(const std::vector<std::string>& texts, Provider& provider);

}  // namespace netlens::sentiment
