#pragma once

#include <span>
#include <string_view>

namespace stylo::wordlists {

/// 200 frequent English function words for the language fallback check.
std::span<const std::string_view> english_stopwords();

/// Irregular past participles recognized by passive-voice detection.
std::span<const std::string_view> irregular_participles();

/// Lowercased abbreviations (with their trailing period) that never end a sentence.
std::span<const std::string_view> abbreviations();

/// The 47 default AI-topic lexicon terms.
std::span<const std::string_view> default_lexicon_terms();

bool is_stopword(std::string_view lower_word);
bool is_irregular_participle(std::string_view lower_word);
bool is_abbreviation(std::string_view lower_token_with_period);

} // namespace stylo::wordlists
