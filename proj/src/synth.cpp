#include "stylo/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "stylo/io.hpp"
#include "stylo/rng.hpp"
#include "stylo/wordlists.hpp"

namespace stylo {

DeltaPopulation gen_delta_population(const std::vector<ArchetypeSpec>& specs, std::size_t noise_count,
                                     std::uint64_t seed) {
    std::size_t clustered = 0;
    for (const auto& s : specs) {
        if (!(s.cov_scale > 0.0)) throw InputError(fmt::format("archetype spec '{}' needs cov_scale > 0", s.name));
        clustered += s.count;
    }
    if (clustered + noise_count < 50) throw InputError("gen_delta_population needs at least 50 points in total");

    constexpr Eigen::Index dims = kFeatureCount;
    DeltaPopulation pop;
    pop.points.resize(static_cast<Eigen::Index>(clustered + noise_count), dims);
    Rng rng(seed);
    Eigen::Index row = 0;
    for (std::size_t k = 0; k < specs.size(); ++k) {
        const auto& s = specs[k];
        for (std::size_t i = 0; i < s.count; ++i, ++row) {
            for (Eigen::Index d = 0; d < dims; ++d) {
                const double mu = d < static_cast<Eigen::Index>(kStyleFeatureCount)
                                      ? s.style_delta_mean[static_cast<std::size_t>(d)]
                                      : s.theme_delta_mean;
                pop.points(row, d) = rng.normal(mu, s.cov_scale);
            }
            pop.labels.push_back(static_cast<int>(k));
        }
    }
    if (noise_count > 0) {
        Eigen::VectorXd lo = Eigen::VectorXd::Zero(dims), hi = Eigen::VectorXd::Zero(dims);
        if (clustered > 0) {
            lo = pop.points.topRows(row).colwise().minCoeff().transpose();
            hi = pop.points.topRows(row).colwise().maxCoeff().transpose();
        } else {
            lo.setConstant(-1.0);
            hi.setConstant(1.0);
        }
        const Eigen::VectorXd centre = (lo + hi) / 2.0;
        const Eigen::VectorXd half = (hi - lo) * 0.75;
        for (std::size_t i = 0; i < noise_count; ++i, ++row) {
            for (Eigen::Index d = 0; d < dims; ++d) pop.points(row, d) = rng.uniform(centre(d) - half(d), centre(d) + half(d));
            pop.labels.push_back(-1);
        }
    }
    return pop;
}

DocCorpusSpec DocCorpusSpec::three_archetypes(std::size_t per_archetype, std::size_t noise_authors) {
    DocCorpusSpec spec;
    // ppl, ttr, fkgl, passive, firstperson, punct, sentlen, ai_topic_share
    spec.profiles = {
        {"Adopter", per_archetype, {2.5, -1.5, 1.5, 1.5, -1.5, 1.0, 1.5, 1.0}},
        {"Resistor", per_archetype, {-2.5, 1.5, -1.5, -1.0, 1.5, -1.0, -1.5, -0.5}},
        {"Pragmatist", per_archetype, {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.5}},
    };
    spec.noise_authors = noise_authors;
    return spec;
}

namespace {

// Per-knob baseline and per-document spread. Shifts are expressed in spreads.
struct Knob {
    double base;
    double spread;
    double lo;
    double hi;
};
constexpr std::array<Knob, kFeatureCount> kKnobs = {{
    {0.0, 0.1, -10.0, 10.0}, // perplexity gap, nats per char
    {150.0, 35.0, 12.0, 400.0}, // content vocabulary size
    {2.2, 0.3, 1.0, 4.0},    // mean syllables per content word
    {0.25, 0.08, 0.0, 1.0},  // passive sentence rate
    {0.3, 0.08, 0.0, 1.0},   // first-person subject rate
    {1.2, 0.35, 0.0, 6.0},   // commas per sentence
    {14.0, 2.0, 7.0, 40.0},  // words per sentence
    {0.05, 0.025, 0.0, 0.8}, // lexicon-term rate per noun
}};

constexpr std::size_t kPoolSize = 400;
constexpr std::size_t kSentencesPerDoc = 10;
constexpr UnixSeconds kPreStart = 1640995200;  // 2022-01-01
constexpr UnixSeconds kPreEnd = 1668556800;    // 2022-11-16
constexpr UnixSeconds kPostStart = 1671062400; // 2022-12-15
constexpr UnixSeconds kPostEnd = 1698796800;   // 2023-11-01

constexpr std::array<std::string_view, 14> kTopicWords = {
    "ai",        "llm",     "gpt",       "chatgpt",  "prompt",     "model",    "chatbot",
    "embedding", "dataset", "algorithm", "openai",   "automation", "inference", "transformer"};

bool reserved(const std::string& w) {
    static const std::set<std::string, std::less<>> extra = {"i", "me", "my", "we", "us", "our", "am", "is", "are",
                                                            "was", "were", "be", "been", "being"};
    if (extra.count(w) || wordlists::is_stopword(w) || wordlists::is_irregular_participle(w)) return true;
    for (auto t : wordlists::default_lexicon_terms())
        if (t == w) return true;
    return false;
}

// Pseudo-words with exactly k vowel groups: consonant-vowel syllables,
// vowels drawn from "aiou" so that no silent-e rule applies.
std::array<std::vector<std::string>, 5> build_pools() {
    static constexpr std::string_view consonants = "bdfgklmnprstvz";
    static constexpr std::string_view vowels = "aiou";
    Rng rng(0x5eed0f1e);
    std::array<std::vector<std::string>, 5> pools;
    std::set<std::string> seen;
    for (int k = 1; k <= 4; ++k) {
        while (pools[static_cast<std::size_t>(k)].size() < kPoolSize) {
            std::string w;
            for (int s = 0; s < k; ++s) {
                w += consonants[rng.index(consonants.size())];
                w += vowels[rng.index(vowels.size())];
            }
            if (k == 1 || rng.bernoulli(0.3)) w += consonants[rng.index(consonants.size())];
            if (reserved(w) || !seen.insert(w).second) continue;
            pools[static_cast<std::size_t>(k)].push_back(w);
        }
    }
    return pools;
}

const std::array<std::vector<std::string>, 5>& pools() {
    static const auto p = build_pools();
    return p;
}

struct AuthorState {
    std::array<std::vector<std::size_t>, 5> order; ///< author-specific permutation of each pool
    std::array<double, kFeatureCount> base{};
    std::array<double, kFeatureCount> shift{};
};

struct DocKnobs {
    double vocab, syllables, passive, first_person, commas, sent_len, topic;
};

class DocWriter {
public:
    DocWriter(Rng& rng, const AuthorState& author, const DocKnobs& k) : rng_(rng), author_(author), k_(k) {}

    std::string write() {
        std::string text;
        for (std::size_t s = 0; s < kSentencesPerDoc; ++s) {
            if (!text.empty()) text += ' ';
            text += sentence();
        }
        return text;
    }

private:
    std::string content_word() {
        const double m = k_.syllables;
        auto k = static_cast<std::size_t>(std::floor(m));
        if (rng_.bernoulli(m - std::floor(m))) ++k;
        k = std::clamp<std::size_t>(k, 1, 4);
        const auto limit = static_cast<std::size_t>(std::clamp(k_.vocab, 1.0, static_cast<double>(kPoolSize)));
        return pools()[k][author_.order[k][rng_.index(limit)]];
    }

    std::string noun() {
        if (rng_.bernoulli(k_.topic)) return std::string(kTopicWords[rng_.index(kTopicWords.size())]);
        return content_word();
    }

    std::string sentence() {
        std::vector<std::string> w;
        std::vector<std::size_t> boundaries; // indices after which a comma may go
        const bool first_person = rng_.bernoulli(k_.first_person);
        const bool plural = rng_.bernoulli(0.5);
        if (first_person) {
            w.push_back(plural ? "we" : "I");
        } else {
            w.push_back("the");
            w.push_back(noun());
        }
        if (rng_.bernoulli(k_.passive)) {
            w.push_back(first_person && plural ? "were" : "was");
            w.push_back(content_word() + "ed");
            w.push_back("by");
            w.push_back("the");
        } else {
            w.push_back(content_word() + "s");
            w.push_back("the");
        }
        w.push_back(noun());

        const auto target = static_cast<std::size_t>(std::max(5.0, std::round(k_.sent_len + rng_.uniform(-2.0, 2.0))));
        while (w.size() < target) {
            boundaries.push_back(w.size() - 1);
            switch (rng_.index(7)) {
            case 0: w.insert(w.end(), {"of", "the", noun()}); break;
            case 1: w.insert(w.end(), {"with", noun()}); break;
            case 2: w.insert(w.end(), {"and", "the", noun()}); break;
            case 3: w.insert(w.end(), {"in", "a", noun()}); break;
            case 4: w.insert(w.end(), {"for", noun()}); break;
            case 5: w.insert(w.end(), {"to", "the", noun()}); break;
            default: w.push_back(noun()); break;
            }
        }

        auto commas = static_cast<std::size_t>(std::floor(k_.commas + rng_.uniform()));
        std::vector<bool> comma_after(w.size(), false);
        rng_.shuffle(boundaries);
        for (std::size_t i = 0; i < commas && i < boundaries.size(); ++i) comma_after[boundaries[i]] = true;

        std::string out;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (i > 0) out += ' ';
            out += w[i];
            if (comma_after[i]) out += ',';
        }
        out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
        out += '.';
        return out;
    }

    Rng& rng_;
    const AuthorState& author_;
    DocKnobs k_;
};

double knob_value(const AuthorState& a, std::size_t f, bool post, Rng& rng) {
    const auto& k = kKnobs[f];
    const double v = k.base + a.base[f] + (post ? a.shift[f] * k.spread : 0.0) + rng.normal(0.0, k.spread);
    return std::clamp(v, k.lo, k.hi);
}

} // namespace

SynthCorpus gen_document_corpus(const DocCorpusSpec& spec) {
    if (spec.docs_per_author_per_period < 2) throw InputError("gen_document_corpus needs at least 2 docs per period");
    static const std::array<std::pair<std::string_view, double>, 4> categories = {
        {{"Gaming", 0.23}, {"Tech", 0.31}, {"Social", 0.28}, {"Other", 0.18}}};

    SynthCorpus out;
    Rng rng(spec.seed);
    std::vector<std::pair<int, std::array<double, kFeatureCount>>> plan;
    for (std::size_t p = 0; p < spec.profiles.size(); ++p)
        for (std::size_t i = 0; i < spec.profiles[p].authors; ++i) plan.emplace_back(static_cast<int>(p), spec.profiles[p].shift);
    for (std::size_t i = 0; i < spec.noise_authors; ++i) {
        std::array<double, kFeatureCount> s{};
        for (auto& v : s) v = rng.uniform(-spec.noise_shift_range, spec.noise_shift_range);
        plan.emplace_back(-1, s);
    }
    // Interleave groups so author ids carry no information about the planted label.
    rng.shuffle(plan);

    for (std::size_t a = 0; a < plan.size(); ++a) {
        const std::string author_id = fmt::format("u{:04}", a);
        const auto& [label, shift] = plan[a];
        out.truth.push_back({author_id, label >= 0 ? spec.profiles[static_cast<std::size_t>(label)].name : "noise", label});

        AuthorState st;
        st.shift = shift;
        for (std::size_t f = 0; f < kFeatureCount; ++f) st.base[f] = rng.normal(0.0, kKnobs[f].spread * 0.5);
        for (std::size_t k = 1; k <= 4; ++k) {
            st.order[k].resize(kPoolSize);
            for (std::size_t i = 0; i < kPoolSize; ++i) st.order[k][i] = i;
            rng.shuffle(st.order[k]);
        }
        const double r = rng.uniform();
        std::string category;
        double acc = 0.0;
        for (const auto& [name, frac] : categories) {
            acc += frac;
            category = std::string(name);
            if (r < acc) break;
        }
        const double judge_rate = rng.normal(2.0, 0.1);

        for (int period = 0; period < 2; ++period) {
            const bool post = period == 1;
            for (std::size_t d = 0; d < spec.docs_per_author_per_period; ++d) {
                DocKnobs k{knob_value(st, idx(Feature::ttr), post, rng),  knob_value(st, idx(Feature::fkgl), post, rng),
                           knob_value(st, idx(Feature::passive), post, rng),
                           knob_value(st, idx(Feature::firstperson), post, rng),
                           knob_value(st, idx(Feature::punct), post, rng), knob_value(st, idx(Feature::sentlen), post, rng),
                           knob_value(st, idx(Feature::ai_topic_share), post, rng)};
                const double gap = knob_value(st, idx(Feature::ppl), post, rng);
                const UnixSeconds ts = post ? kPostStart + static_cast<UnixSeconds>(rng.index(kPostEnd - kPostStart))
                                            : kPreStart + static_cast<UnixSeconds>(rng.index(kPreEnd - kPreStart));
                DocWriter writer(rng, st, k);
                Document doc = make_document(fmt::format("{}-{}-{:03}", author_id, post ? "post" : "pre", d), author_id, ts,
                                             Genre::social, category, writer.write());
                doc.server_members = 500;

                const double jitter = rng.normal(0.0, 0.05);
                const double judge = std::max(0.05, judge_rate + jitter);
                const double current = std::max(0.01, judge - gap);
                const auto chars = static_cast<double>(doc.char_count);
                out.logprobs.push_back({doc.doc_id, spec.judge_model_id, judge * chars, doc.char_count, false});
                out.logprobs.push_back({doc.doc_id, spec.current_model_id, current * chars, doc.char_count, false});
                out.docs.push_back(std::move(doc));
            }
        }
    }
    return out;
}

void write_truth_csv(const std::filesystem::path& path, const std::vector<TruthRow>& truth) {
    std::string s = "author_id,archetype,label\n";
    for (const auto& t : truth) s += fmt::format("{},{},{}\n", csv_escape(t.author_id), csv_escape(t.archetype), t.label);
    write_file(path, s);
}

std::vector<TruthRow> read_truth_csv(const std::filesystem::path& path) {
    const auto t = read_csv(path);
    const auto ca = t.column("author_id"), cn = t.column("archetype"), cl = t.column("label");
    std::vector<TruthRow> out;
    for (const auto& row : t.rows) {
        try {
            out.push_back({row.at(ca), row.at(cn), std::stoi(row.at(cl))});
        } catch (const std::exception&) {
            throw DataError(fmt::format("{}: malformed truth row", path.string()));
        }
    }
    return out;
}

} // namespace stylo
