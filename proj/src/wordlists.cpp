#include "stylo/wordlists.hpp"

#include <algorithm>
#include <array>
#include <string_view>

namespace stylo::wordlists {

namespace {

constexpr std::array<std::string_view, 200> kStopwords{{
    "a", "about", "above", "after", "again", "against", "all", "am",
    "an", "and", "any", "are", "as", "at", "be", "because",
    "been", "before", "being", "below", "between", "both", "but", "by",
    "can", "could", "did", "do", "does", "doing", "down", "during",
    "each", "few", "for", "from", "further", "had", "has", "have",
    "having", "he", "her", "here", "hers", "herself", "him", "himself",
    "his", "how", "i", "if", "in", "into", "is", "it",
    "its", "itself", "just", "me", "more", "most", "my", "myself",
    "no", "nor", "not", "now", "of", "off", "on", "once",
    "only", "or", "other", "our", "ours", "ourselves", "out", "over",
    "own", "same", "she", "should", "so", "some", "such", "than",
    "that", "the", "their", "theirs", "them", "themselves", "then", "there",
    "these", "they", "this", "those", "through", "to", "too", "under",
    "until", "up", "very", "was", "we", "were", "what", "when",
    "where", "which", "while", "who", "whom", "why", "will", "with",
    "would", "you", "your", "yours", "yourself", "yourselves", "also", "always",
    "another", "anything", "around", "away", "back", "become", "come", "comes",
    "done", "either", "else", "enough", "even", "ever", "every", "everything",
    "get", "give", "go", "goes", "going", "gone", "got", "however",
    "know", "less", "let", "like", "made", "make", "many", "may",
    "maybe", "might", "mine", "much", "must", "need", "never", "next",
    "nothing", "often", "one", "perhaps", "quite", "rather", "really", "say",
    "see", "seem", "seems", "since", "something", "sometimes", "still", "take",
    "tell", "think", "though", "thus", "together", "upon", "us", "use",
    "used", "want", "way", "well", "went", "whether", "yet", "yes",
}};

constexpr std::array<std::string_view, 188> kParticiples{{
    "arisen", "awoken", "been", "borne", "beaten", "become", "begun", "bent",
    "bet", "bid", "bitten", "bled", "blown", "broken", "bred", "brought",
    "broadcast", "built", "burnt", "burst", "bought", "cast", "caught", "chosen",
    "clung", "come", "cost", "crept", "cut", "dealt", "dug", "done",
    "drawn", "dreamt", "drunk", "driven", "eaten", "fallen", "fed", "felt",
    "fought", "found", "fled", "flung", "flown", "forbidden", "forecast", "forgotten",
    "forgiven", "forsaken", "frozen", "gotten", "given", "gone", "ground", "grown",
    "hung", "had", "heard", "hidden", "hit", "held", "hurt", "kept",
    "knelt", "known", "laid", "led", "leant", "leapt", "learnt", "left",
    "lent", "let", "lain", "lit", "lost", "made", "meant", "met",
    "mistaken", "misunderstood", "mown", "overcome", "overdone", "overtaken", "overthrown", "paid",
    "proven", "put", "quit", "read", "rid", "ridden", "rung", "risen",
    "run", "sawn", "said", "seen", "sought", "sold", "sent", "set",
    "sewn", "shaken", "shed", "shone", "shot", "shown", "shrunk", "shut",
    "sung", "sunk", "sat", "slain", "slept", "slid", "slung", "slit",
    "smelt", "sown", "spoken", "sped", "spent", "spilt", "spun", "spat",
    "split", "spoilt", "spread", "sprung", "stood", "stolen", "stuck", "stung",
    "stunk", "stridden", "struck", "strung", "striven", "sworn", "swept", "swollen",
    "swum", "swung", "taken", "taught", "torn", "told", "thought", "thrown",
    "thrust", "trodden", "understood", "undertaken", "undone", "upset", "woken", "worn",
    "woven", "wed", "wept", "won", "wound", "withdrawn", "withheld", "withstood",
    "wrung", "written", "bound", "fit", "foregone", "inlaid", "outdone", "outgrown",
    "overheard", "overseen", "oversold", "rebuilt", "redone", "remade", "repaid", "rewritten",
    "spelt", "undergone", "underwritten", "unwound",
}};

constexpr std::array<std::string_view, 50> kAbbreviations{{
    "dr.", "mr.", "mrs.", "ms.", "prof.", "sr.", "jr.", "st.",
    "vs.", "etc.", "e.g.", "i.e.", "cf.", "al.", "fig.", "no.",
    "vol.", "approx.", "inc.", "ltd.", "co.", "corp.", "jan.", "feb.",
    "mar.", "apr.", "jun.", "jul.", "aug.", "sep.", "sept.", "oct.",
    "nov.", "dec.", "mt.", "gen.", "gov.", "sen.", "rep.", "u.s.",
    "u.k.", "a.m.", "p.m.", "ph.d.", "eq.", "sec.", "ch.", "ed.",
    "est.", "dept.",
}};

constexpr std::array<std::string_view, 47> kLexicon{{
    "ai", "ml", "neural", "transformer", "gpt", "chatgpt",
    "llm", "language model", "prompt", "prompt engineering", "hallucination", "fine-tune",
    "embedding", "chatbot", "openai", "copilot", "midjourney", "stable diffusion",
    "diffusion", "agi", "inference", "token", "alignment", "rlhf",
    "dataset", "machine learning", "deep learning", "neural network", "gpt-4", "gpt-3",
    "claude", "gemini", "llama", "bard", "generative", "generative ai",
    "automation", "algorithm", "model", "training", "bot", "assistant",
    "detector", "ai-generated", "synthetic", "anthropic", "deepmind",
}};

template <std::size_t N>
constexpr std::array<std::string_view, N> sorted(std::array<std::string_view, N> a) {
    std::sort(a.begin(), a.end());
    return a;
}

constexpr auto kStopwordsSorted = sorted(kStopwords);
constexpr auto kParticiplesSorted = sorted(kParticiples);
constexpr auto kAbbreviationsSorted = sorted(kAbbreviations);

} // namespace

std::span<const std::string_view> english_stopwords() { return kStopwords; }
std::span<const std::string_view> irregular_participles() { return kParticiples; }
std::span<const std::string_view> abbreviations() { return kAbbreviations; }
std::span<const std::string_view> default_lexicon_terms() { return kLexicon; }

bool is_stopword(std::string_view w) {
    return std::binary_search(kStopwordsSorted.begin(), kStopwordsSorted.end(), w);
}

bool is_irregular_participle(std::string_view w) {
    return std::binary_search(kParticiplesSorted.begin(), kParticiplesSorted.end(), w);
}

bool is_abbreviation(std::string_view w) {
    return std::binary_search(kAbbreviationsSorted.begin(), kAbbreviationsSorted.end(), w);
}

} // namespace stylo::wordlists
