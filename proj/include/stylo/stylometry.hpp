#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stylo/corpus.hpp"

namespace stylo {

struct Token {
    std::string text;
    bool is_word = true; ///< false for a single punctuation mark
};

/// Word tokens are maximal runs of letters, digits and apostrophes that contain
/// at least one letter or digit. Every other non-space character is its own
/// punctuation token.
std::vector<Token> tokenize(std::string_view text);

/// Splits after `.`, `!` or `?` runs followed by whitespace and an uppercase
/// letter, or by end of text. Known abbreviations never end a sentence.
/// Sentences without any word token are dropped.
std::vector<std::string> split_sentences(std::string_view text);

/// Lowercased word tokens, punctuation removed.
std::vector<std::string> word_tokens_lower(const std::vector<Token>& tokens);

/// Moving-window type-token ratio; nullopt for zero tokens.
std::optional<double> windowed_ttr(const std::vector<std::string>& words, std::size_t window = 150,
                                   std::size_t overlap = 75);

/// Vowel-group syllable heuristic with silent trailing e.
int count_syllables(std::string_view word);

/// Flesch-Kincaid grade level; nullopt without sentences or words.
std::optional<double> fkgl(const std::vector<Token>& tokens, const std::vector<std::string>& sentences);

/// Fraction of sentences with a "be" form followed by a past participle
/// with at most two intervening words.
std::optional<double> passive_pct(const std::vector<std::string>& sentences);

std::optional<double> first_person_pct(const std::vector<Token>& tokens);
/// Punctuation tokens per 100 word tokens.
std::optional<double> punct_density(const std::vector<Token>& tokens);
std::optional<double> mean_sent_len(const std::vector<Token>& tokens, const std::vector<std::string>& sentences);

struct Lexicon {
    std::vector<std::string> terms;
    std::map<std::string, double> idf;
    /// Fixed weights from the config file; they take precedence over computed idf.
    std::map<std::string, double> idf_overrides;
    double threshold = 0.23;

    static Lexicon defaults();
    /// JSON: {"terms": [...], "idf_overrides": {term: weight}, "threshold": 0.23}.
    static Lexicon from_json_file(const std::filesystem::path& path);
    nlohmann::json to_json() const;
    void validate() const;
};

/// A lexicon term occurrence found by greedy longest match over word tokens.
/// Terms are split on spaces and hyphens, so "gpt-4" matches the words "gpt" "4".
struct TermMatcher {
    explicit TermMatcher(const std::vector<std::string>& terms);

    /// Term index per match; `unmatched` receives the count of words outside any match.
    std::vector<std::size_t> match(const std::vector<std::string>& words, std::size_t* unmatched = nullptr) const;

    std::vector<std::vector<std::string>> parts;
    std::size_t max_len = 1;
};

/// idf(t) = ln((1 + N) / (1 + df(t))) + 1 over the corpus documents.
Lexicon build_lexicon(const std::vector<Document>& corpus, Lexicon base);

struct TopicShare {
    double share = 0.0;
    bool topical = false;
};

/// Weighted share of lexicon mass in the document. Words outside the lexicon weigh 1.0.
std::optional<TopicShare> ai_topic_share(const std::vector<std::string>& words, const Lexicon& lexicon);

struct FeatureRecord {
    std::string doc_id;
    std::optional<double> ttr;
    std::optional<double> fkgl;
    std::optional<double> passive_pct;
    std::optional<double> first_person_pct;
    std::optional<double> punct_density;
    std::optional<double> mean_sent_len;
    std::optional<double> ai_topic_share;
    bool ai_topical = false;
    std::size_t word_count = 0;
};

FeatureRecord extract_features(const Document& doc, const Lexicon& lexicon);

/// Per-document extraction, optionally spread over `jobs` threads. Output order follows input.
std::vector<FeatureRecord> extract_all(const std::vector<Document>& docs, const Lexicon& lexicon, int jobs = 1);

/// Stable column order: doc_id, ttr, fkgl, passive_pct, first_person_pct,
/// punct_density, mean_sent_len, ai_topic_share, ai_topical, word_count.
/// Missing values are empty cells.
void write_features_csv(const std::filesystem::path& path, const std::vector<FeatureRecord>& records);
std::vector<FeatureRecord> read_features_csv(const std::filesystem::path& path);

} // namespace stylo
