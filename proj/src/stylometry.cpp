#include "stylo/stylometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>
#include <unicode/uchar.h>

#include "stylo/io.hpp"
#include "stylo/wordlists.hpp"

namespace stylo {

namespace {

bool is_apostrophe(char32_t cp) { return cp == U'\'' || cp == U'’'; }

bool is_word_char(char32_t cp) {
    if (cp < 0x80) return std::isalnum(static_cast<int>(cp)) != 0;
    return u_isalnum(static_cast<UChar32>(cp)) != 0;
}

bool is_space(char32_t cp) {
    if (cp < 0x80) return std::isspace(static_cast<int>(cp)) != 0;
    return u_isUWhiteSpace(static_cast<UChar32>(cp)) != 0;
}

bool is_terminator(char32_t cp) { return cp == U'.' || cp == U'!' || cp == U'?'; }

bool is_closer(char32_t cp) {
    return cp == U'"' || cp == U'\'' || cp == U')' || cp == U']' || cp == U'’' || cp == U'”';
}

bool is_opener(char32_t cp) { return cp == U'"' || cp == U'\'' || cp == U'(' || cp == U'[' || cp == U'“'; }

bool is_upper(char32_t cp) {
    if (cp < 0x80) return std::isupper(static_cast<int>(cp)) != 0;
    return u_isupper(static_cast<UChar32>(cp)) != 0;
}

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string encode(const std::vector<char32_t>& cps, std::size_t b, std::size_t e) {
    std::string out;
    for (std::size_t i = b; i < e; ++i) utf8_append(out, cps[i]);
    return out;
}

bool contains_word(std::string_view s) {
    for (char32_t cp : utf8_decode(s))
        if (is_word_char(cp)) return true;
    return false;
}

constexpr std::array<std::string_view, 8> kBeForms = {"am", "is", "are", "was", "were", "be", "been", "being"};
constexpr std::array<std::string_view, 10> kFirstPerson = {"i",  "me",  "my",   "mine",   "we",
                                                           "us", "our", "ours", "myself", "ourselves"};

bool is_vowel(char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

bool is_past_participle(std::string_view w) {
    if (wordlists::is_irregular_participle(w)) return true;
    return w.size() >= 4 && w.ends_with("ed");
}

} // namespace

std::vector<Token> tokenize(std::string_view text) {
    const auto cps = utf8_decode(text);
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < cps.size()) {
        const char32_t cp = cps[i];
        if (is_space(cp)) {
            ++i;
            continue;
        }
        if (is_word_char(cp) || is_apostrophe(cp)) {
            std::size_t j = i;
            bool has_alnum = false;
            while (j < cps.size() && (is_word_char(cps[j]) || is_apostrophe(cps[j]))) {
                has_alnum = has_alnum || is_word_char(cps[j]);
                ++j;
            }
            if (has_alnum) {
                out.push_back({encode(cps, i, j), true});
            } else {
                for (std::size_t k = i; k < j; ++k) out.push_back({encode(cps, k, k + 1), false});
            }
            i = j;
            continue;
        }
        out.push_back({encode(cps, i, i + 1), false});
        ++i;
    }
    return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
    const auto cps = utf8_decode(text);
    const std::size_t n = cps.size();
    std::vector<std::string> out;
    auto emit = [&](std::size_t b, std::size_t e) {
        while (b < e && is_space(cps[b])) ++b;
        while (e > b && is_space(cps[e - 1])) --e;
        if (b == e) return;
        std::string s = encode(cps, b, e);
        if (contains_word(s)) out.push_back(std::move(s));
    };

    std::size_t start = 0;
    std::size_t i = 0;
    while (i < n) {
        if (!is_terminator(cps[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && is_terminator(cps[j])) ++j;
        const bool single_period = (j - i == 1 && cps[i] == U'.');
        while (j < n && is_closer(cps[j])) ++j;

        std::size_t k = j;
        while (k < n && is_space(cps[k])) ++k;
        bool split = false;
        if (k == n) {
            split = true;
        } else if (k > j) {
            std::size_t m = k;
            while (m < n && is_opener(cps[m])) ++m;
            split = m < n && is_upper(cps[m]);
        }
        if (split && single_period) {
            std::size_t w = i;
            while (w > start && !is_space(cps[w - 1])) --w;
            while (w < i && is_opener(cps[w])) ++w;
            if (wordlists::is_abbreviation(lower_ascii(encode(cps, w, i + 1)))) split = false;
        }
        if (split) {
            emit(start, j);
            start = j;
        }
        i = j;
    }
    emit(start, n);
    return out;
}

std::vector<std::string> word_tokens_lower(const std::vector<Token>& tokens) {
    std::vector<std::string> out;
    for (const auto& t : tokens)
        if (t.is_word) out.push_back(lower_ascii(t.text));
    return out;
}

std::optional<double> windowed_ttr(const std::vector<std::string>& words, std::size_t window, std::size_t overlap) {
    if (words.empty()) return std::nullopt;
    if (window == 0 || overlap >= window) throw InputError("TTR window must exceed overlap");
    const std::size_t n = words.size();
    auto ratio = [&](std::size_t b, std::size_t e) {
        std::unordered_set<std::string_view> types;
        for (std::size_t i = b; i < e; ++i) types.insert(words[i]);
        return static_cast<double>(types.size()) / static_cast<double>(e - b);
    };
    if (2 * n < window) return ratio(0, n);

    const std::size_t stride = window - overlap;
    double sum = 0.0;
    std::size_t count = 0;
    std::size_t covered = 0;
    for (std::size_t s = 0; s < n; s += stride) {
        if (s + window <= n) {
            sum += ratio(s, s + window);
            ++count;
            covered = s + window;
        } else {
            // Trailing partial window: only if it reaches uncovered tokens and is long enough.
            if (n > covered && 2 * (n - s) >= window) {
                sum += ratio(s, n);
                ++count;
            }
            break;
        }
    }
    return sum / static_cast<double>(count);
}

int count_syllables(std::string_view word) {
    std::string w;
    for (char c : word) {
        const auto uc = static_cast<unsigned char>(c);
        if (std::isalpha(uc)) w.push_back(static_cast<char>(std::tolower(uc)));
    }
    if (w.empty()) return 1;
    int groups = 0;
    bool in_vowel = false;
    for (char c : w) {
        const bool v = is_vowel(c);
        if (v && !in_vowel) ++groups;
        in_vowel = v;
    }
    const std::size_t len = w.size();
    if (len >= 2 && w[len - 1] == 'e' && !is_vowel(w[len - 2])) {
        const bool consonant_le = len >= 3 && w[len - 2] == 'l' && !is_vowel(w[len - 3]);
        if (!consonant_le) --groups;
    }
    return std::max(groups, 1);
}

std::optional<double> fkgl(const std::vector<Token>& tokens, const std::vector<std::string>& sentences) {
    if (sentences.empty()) return std::nullopt;
    std::size_t words = 0;
    std::size_t syllables = 0;
    for (const auto& t : tokens) {
        if (!t.is_word) continue;
        ++words;
        syllables += static_cast<std::size_t>(count_syllables(t.text));
    }
    if (words == 0) return std::nullopt;
    const double w = static_cast<double>(words);
    return 0.39 * (w / static_cast<double>(sentences.size())) + 11.8 * (static_cast<double>(syllables) / w) - 15.59;
}

std::optional<double> passive_pct(const std::vector<std::string>& sentences) {
    if (sentences.empty()) return std::nullopt;
    std::size_t passive = 0;
    for (const auto& s : sentences) {
        const auto words = word_tokens_lower(tokenize(s));
        bool found = false;
        for (std::size_t i = 0; i < words.size() && !found; ++i) {
            if (std::find(kBeForms.begin(), kBeForms.end(), words[i]) == kBeForms.end()) continue;
            for (std::size_t j = i + 1; j < words.size() && j <= i + 3; ++j) {
                if (is_past_participle(words[j])) {
                    found = true;
                    break;
                }
            }
        }
        if (found) ++passive;
    }
    return static_cast<double>(passive) / static_cast<double>(sentences.size());
}

std::optional<double> first_person_pct(const std::vector<Token>& tokens) {
    std::size_t words = 0;
    std::size_t hits = 0;
    for (const auto& t : tokens) {
        if (!t.is_word) continue;
        ++words;
        const auto w = lower_ascii(t.text);
        if (std::find(kFirstPerson.begin(), kFirstPerson.end(), w) != kFirstPerson.end()) ++hits;
    }
    if (words == 0) return std::nullopt;
    return static_cast<double>(hits) / static_cast<double>(words);
}

std::optional<double> punct_density(const std::vector<Token>& tokens) {
    std::size_t words = 0;
    std::size_t punct = 0;
    for (const auto& t : tokens) (t.is_word ? words : punct) += 1;
    if (words == 0) return std::nullopt;
    return 100.0 * static_cast<double>(punct) / static_cast<double>(words);
}

std::optional<double> mean_sent_len(const std::vector<Token>& tokens, const std::vector<std::string>& sentences) {
    const auto words = static_cast<std::size_t>(std::count_if(tokens.begin(), tokens.end(), [](const Token& t) { return t.is_word; }));
    if (words == 0 || sentences.empty()) return std::nullopt;
    return static_cast<double>(words) / static_cast<double>(sentences.size());
}

Lexicon Lexicon::defaults() {
    Lexicon lex;
    for (auto t : wordlists::default_lexicon_terms()) lex.terms.emplace_back(t);
    return lex;
}

Lexicon Lexicon::from_json_file(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(fmt::format("lexicon {}: {}", path.string(), e.what()));
    }
    if (!j.is_object()) throw ConfigError(fmt::format("lexicon {}: expected a JSON object", path.string()));
    for (const auto& [k, v] : j.items())
        if (k != "terms" && k != "idf_overrides" && k != "threshold")
            throw ConfigError(fmt::format("lexicon {}: unknown key '{}'", path.string(), k));
    Lexicon lex;
    try {
        for (const auto& t : j.at("terms")) lex.terms.push_back(lower_ascii(t.get<std::string>()));
        if (j.contains("idf_overrides"))
            for (const auto& [k, v] : j["idf_overrides"].items()) lex.idf_overrides[lower_ascii(k)] = v.get<double>();
        if (j.contains("threshold")) lex.threshold = j["threshold"].get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(fmt::format("lexicon {}: {}", path.string(), e.what()));
    }
    lex.validate();
    return lex;
}

nlohmann::json Lexicon::to_json() const {
    return {{"terms", terms}, {"idf", idf}, {"idf_overrides", idf_overrides}, {"threshold", threshold}};
}

void Lexicon::validate() const {
    if (terms.empty()) throw ConfigError("lexicon has no terms");
    std::unordered_set<std::string> seen;
    for (const auto& t : terms)
        if (!seen.insert(t).second) throw ConfigError(fmt::format("duplicate lexicon term '{}'", t));
    for (const auto& [t, w] : idf)
        if (!(w >= 0.0)) throw ConfigError(fmt::format("negative idf for '{}'", t));
    for (const auto& [t, w] : idf_overrides)
        if (!(w >= 0.0)) throw ConfigError(fmt::format("negative idf override for '{}'", t));
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("lexicon threshold outside [0,1]");
}

TermMatcher::TermMatcher(const std::vector<std::string>& terms) {
    for (const auto& term : terms) {
        std::vector<std::string> p;
        std::string cur;
        for (char c : lower_ascii(term)) {
            if (c == ' ' || c == '-') {
                if (!cur.empty()) p.push_back(std::move(cur));
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        if (!cur.empty()) p.push_back(std::move(cur));
        max_len = std::max(max_len, p.size());
        parts.push_back(std::move(p));
    }
}

std::vector<std::size_t> TermMatcher::match(const std::vector<std::string>& words, std::size_t* unmatched) const {
    std::vector<std::size_t> out;
    std::size_t misses = 0;
    std::size_t i = 0;
    while (i < words.size()) {
        std::size_t best = parts.size();
        std::size_t best_len = 0;
        for (std::size_t t = 0; t < parts.size(); ++t) {
            const auto& p = parts[t];
            if (p.empty() || p.size() <= best_len || i + p.size() > words.size()) continue;
            if (std::equal(p.begin(), p.end(), words.begin() + static_cast<std::ptrdiff_t>(i))) {
                best = t;
                best_len = p.size();
            }
        }
        if (best == parts.size()) {
            ++misses;
            ++i;
        } else {
            out.push_back(best);
            i += best_len;
        }
    }
    if (unmatched) *unmatched = misses;
    return out;
}

Lexicon build_lexicon(const std::vector<Document>& corpus, Lexicon base) {
    base.validate();
    const TermMatcher matcher(base.terms);
    std::vector<std::size_t> df(base.terms.size(), 0);
    for (const auto& d : corpus) {
        const auto hits = matcher.match(word_tokens_lower(tokenize(d.text)));
        std::vector<bool> present(base.terms.size(), false);
        for (auto t : hits) present[t] = true;
        for (std::size_t t = 0; t < present.size(); ++t) df[t] += present[t] ? 1 : 0;
    }
    const double n = static_cast<double>(corpus.size());
    base.idf.clear();
    for (std::size_t t = 0; t < base.terms.size(); ++t) {
        const auto& term = base.terms[t];
        if (auto it = base.idf_overrides.find(term); it != base.idf_overrides.end()) {
            base.idf[term] = it->second;
        } else {
            base.idf[term] = std::log((1.0 + n) / (1.0 + static_cast<double>(df[t]))) + 1.0;
        }
    }
    return base;
}

namespace {

double idf_of(const Lexicon& lex, const std::string& term) {
    if (auto it = lex.idf_overrides.find(term); it != lex.idf_overrides.end()) return it->second;
    if (auto it = lex.idf.find(term); it != lex.idf.end()) return it->second;
    return 1.0;
}

std::optional<TopicShare> topic_share_with(const std::vector<std::string>& words, const Lexicon& lexicon,
                                           const TermMatcher& matcher) {
    if (words.empty()) return std::nullopt;
    std::size_t misses = 0;
    const auto hits = matcher.match(words, &misses);
    double lexicon_mass = 0.0;
    for (auto t : hits) lexicon_mass += idf_of(lexicon, lexicon.terms[t]);
    const double total = lexicon_mass + static_cast<double>(misses);
    TopicShare out;
    out.share = total > 0.0 ? lexicon_mass / total : 0.0;
    out.topical = out.share >= lexicon.threshold;
    return out;
}

FeatureRecord extract_with(const Document& doc, const Lexicon& lexicon, const TermMatcher& matcher) {
    const auto tokens = tokenize(doc.text);
    const auto sentences = split_sentences(doc.text);
    const auto words = word_tokens_lower(tokens);
    FeatureRecord r;
    r.doc_id = doc.doc_id;
    r.word_count = words.size();
    r.ttr = windowed_ttr(words);
    r.fkgl = fkgl(tokens, sentences);
    r.passive_pct = passive_pct(sentences);
    r.first_person_pct = first_person_pct(tokens);
    r.punct_density = punct_density(tokens);
    r.mean_sent_len = mean_sent_len(tokens, sentences);
    if (auto ts = topic_share_with(words, lexicon, matcher)) {
        r.ai_topic_share = ts->share;
        r.ai_topical = ts->topical;
    }
    return r;
}

} // namespace

std::optional<TopicShare> ai_topic_share(const std::vector<std::string>& words, const Lexicon& lexicon) {
    return topic_share_with(words, lexicon, TermMatcher(lexicon.terms));
}

FeatureRecord extract_features(const Document& doc, const Lexicon& lexicon) {
    return extract_with(doc, lexicon, TermMatcher(lexicon.terms));
}

std::vector<FeatureRecord> extract_all(const std::vector<Document>& docs, const Lexicon& lexicon, int jobs) {
    const TermMatcher matcher(lexicon.terms);
    std::vector<FeatureRecord> out(docs.size());
    const auto workers = static_cast<std::size_t>(std::max(1, jobs));
    if (workers == 1 || docs.size() < 64) {
        for (std::size_t i = 0; i < docs.size(); ++i) out[i] = extract_with(docs[i], lexicon, matcher);
        return out;
    }
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < docs.size(); i += workers) out[i] = extract_with(docs[i], lexicon, matcher);
        });
    }
    return out;
}

void write_features_csv(const std::filesystem::path& path, const std::vector<FeatureRecord>& records) {
    std::string s = "doc_id,ttr,fkgl,passive_pct,first_person_pct,punct_density,mean_sent_len,ai_topic_share,ai_topical,word_count\n";
    for (const auto& r : records) {
        s += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", csv_escape(r.doc_id), cell(r.ttr), cell(r.fkgl),
                         cell(r.passive_pct), cell(r.first_person_pct), cell(r.punct_density), cell(r.mean_sent_len),
                         cell(r.ai_topic_share), r.ai_topical ? 1 : 0, r.word_count);
    }
    write_file(path, s);
}

std::vector<FeatureRecord> read_features_csv(const std::filesystem::path& path) {
    const auto t = read_csv(path);
    const auto c_id = t.column("doc_id"), c_ttr = t.column("ttr"), c_fk = t.column("fkgl"),
               c_pa = t.column("passive_pct"), c_fp = t.column("first_person_pct"), c_pu = t.column("punct_density"),
               c_sl = t.column("mean_sent_len"), c_ai = t.column("ai_topic_share"), c_top = t.column("ai_topical"),
               c_wc = t.column("word_count");
    std::vector<FeatureRecord> out;
    for (const auto& row : t.rows) {
        FeatureRecord r;
        r.doc_id = row[c_id];
        r.ttr = parse_cell(row[c_ttr]);
        r.fkgl = parse_cell(row[c_fk]);
        r.passive_pct = parse_cell(row[c_pa]);
        r.first_person_pct = parse_cell(row[c_fp]);
        r.punct_density = parse_cell(row[c_pu]);
        r.mean_sent_len = parse_cell(row[c_sl]);
        r.ai_topic_share = parse_cell(row[c_ai]);
        r.ai_topical = row[c_top] == "1";
        r.word_count = static_cast<std::size_t>(std::stoull(row[c_wc]));
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace stylo
