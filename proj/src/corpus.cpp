#include "stylo/corpus.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include <fmt/format.h>
#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "stylo/rng.hpp"
#include "stylo/wordlists.hpp"

namespace stylo {

std::string to_string(Genre g) { return g == Genre::social ? "social" : "formal"; }

Genre genre_from_string(const std::string& s) {
    if (s == "social") return Genre::social;
    if (s == "formal") return Genre::formal;
    throw DataError("unknown genre '" + s + "'");
}

Document make_document(std::string doc_id, std::string author_id, UnixSeconds timestamp, Genre genre,
                       std::string category, std::string text, std::optional<double> lang_conf) {
    Document d;
    d.doc_id = std::move(doc_id);
    d.author_id = std::move(author_id);
    d.timestamp = timestamp;
    d.genre = genre;
    d.category = std::move(category);
    d.text = std::move(text);
    d.lang_conf = lang_conf;
    d.char_count = utf8_length(d.text);
    return d;
}

nlohmann::json to_json(const Document& doc) {
    nlohmann::json j = {
        {"doc_id", doc.doc_id},       {"author_id", doc.author_id}, {"timestamp", doc.timestamp},
        {"genre", to_string(doc.genre)}, {"category", doc.category},  {"text", doc.text},
    };
    if (doc.lang_conf) j["lang_conf"] = *doc.lang_conf;
    if (doc.server_members) j["server_members"] = *doc.server_members;
    j["char_count"] = doc.char_count;
    return j;
}

namespace {

const nlohmann::json& require(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) throw DataError(fmt::format("missing field '{}'", key));
    return *it;
}

std::string require_string(const nlohmann::json& j, const char* key) {
    const auto& v = require(j, key);
    if (!v.is_string()) throw DataError(fmt::format("field '{}' must be a string", key));
    return v.get<std::string>();
}

} // namespace

Document document_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw DataError("line is not a JSON object");
    const auto& ts = require(j, "timestamp");
    if (!ts.is_number()) throw DataError("field 'timestamp' must be a number");
    std::optional<double> lang;
    if (auto it = j.find("lang_conf"); it != j.end() && !it->is_null()) {
        if (!it->is_number()) throw DataError("field 'lang_conf' must be a number");
        lang = it->get<double>();
        if (*lang < 0.0 || *lang > 1.0) throw DataError("field 'lang_conf' outside [0,1]");
    }
    Document d = make_document(require_string(j, "doc_id"), require_string(j, "author_id"),
                               static_cast<UnixSeconds>(std::llround(ts.get<double>())),
                               genre_from_string(require_string(j, "genre")), require_string(j, "category"),
                               require_string(j, "text"), lang);
    if (auto it = j.find("server_members"); it != j.end() && !it->is_null()) {
        if (!it->is_number_integer()) throw DataError("field 'server_members' must be an integer");
        d.server_members = it->get<std::int64_t>();
    }
    return d;
}

void BoundaryConfig::validate() const {
    if (exclusion_halfwidth_days < 0) throw ConfigError("exclusion_halfwidth_days must be >= 0");
    if (min_docs_pre < 1 || min_docs_post < 1) throw ConfigError("min doc counts must be >= 1");
}

std::vector<std::string> FilterConfig::default_contamination_patterns() {
    return {"as an ai language model", "as a large language model", "i cannot assist with",
            "i'm sorry, but as an ai"};
}

void FilterConfig::validate() const {
    if (!(min_lang_conf >= 0.0 && min_lang_conf <= 1.0)) throw ConfigError("min_lang_conf outside [0,1]");
    if (min_server_members < 0) throw ConfigError("min_server_members must be >= 0");
    for (const auto& p : contamination_patterns) {
        try {
            std::regex re(p, std::regex::icase);
        } catch (const std::regex_error& e) {
            throw ConfigError(fmt::format("contamination pattern '{}' does not compile: {}", p, e.what()));
        }
    }
}

QuotaConfig QuotaConfig::paper_defaults() {
    QuotaConfig q;
    q.fractions = {{"Gaming", 0.23}, {"Tech", 0.31}, {"Social", 0.28}, {"Other", 0.18}};
    return q;
}

void QuotaConfig::validate() const {
    double sum = 0.0;
    for (const auto& [cat, f] : fractions) {
        if (f < 0.0) throw ConfigError(fmt::format("quota for '{}' is negative", cat));
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError(fmt::format("quota fractions sum to {}, not 1", sum));
    if (tolerance < 0.0) throw ConfigError("quota tolerance must be >= 0");
}

LoadResult parse_corpus(std::istream& in) {
    LoadResult out;
    std::set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            Document d = document_from_json(nlohmann::json::parse(line));
            if (!seen.insert(d.doc_id).second) {
                out.warnings.push_back({lineno, fmt::format("duplicate doc_id '{}'", d.doc_id)});
                continue;
            }
            out.docs.push_back(std::move(d));
        } catch (const nlohmann::json::exception& e) {
            out.warnings.push_back({lineno, e.what()});
        } catch (const DataError& e) {
            out.warnings.push_back({lineno, e.what()});
        }
    }
    return out;
}

LoadResult load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError(fmt::format("cannot read corpus file {}", path.string()));
    return parse_corpus(in);
}

void write_corpus(const std::filesystem::path& path, const std::vector<Document>& docs) {
    std::ofstream out(path);
    if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
    for (const auto& d : docs) out << to_json(d).dump() << '\n';
}

std::set<std::string> load_bot_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError(fmt::format("cannot read bot list {}", path.string()));
    std::set<std::string> bots;
    std::string line;
    while (std::getline(in, line)) {
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos || line[b] == '#') continue;
        const auto e = line.find_last_not_of(" \t\r");
        bots.insert(line.substr(b, e - b + 1));
    }
    return bots;
}

nlohmann::json FilterAudit::to_json() const {
    return {{"input", input},
            {"removed", {{"bot", bot},
                         {"server_size", server_size},
                         {"length", length},
                         {"language", language},
                         {"contamination", contamination},
                         {"duplicate", duplicate}}},
            {"kept", kept}};
}

std::uint64_t content_hash(std::string_view text) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
    icu::UnicodeString u = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    icu::UnicodeString normalized = U_SUCCESS(status) ? nfc->normalize(u, status) : u;
    if (U_FAILURE(status)) normalized = u;
    normalized.toLower(icu::Locale::getRoot());
    std::string lowered;
    normalized.toUTF8String(lowered);

    std::string collapsed;
    collapsed.reserve(lowered.size());
    bool pending_space = false;
    for (char32_t cp : utf8_decode(lowered)) {
        if (u_isUWhiteSpace(static_cast<UChar32>(cp))) {
            pending_space = !collapsed.empty();
            continue;
        }
        if (pending_space) collapsed.push_back(' ');
        pending_space = false;
        utf8_append(collapsed, cp);
    }
    return fnv1a64(collapsed);
}

bool passes_language_heuristic(std::string_view text) {
    std::size_t total = 0;
    std::size_t hits = 0;
    std::istringstream in{std::string(text)};
    std::string tok;
    while (in >> tok) {
        ++total;
        std::string w;
        for (char c : tok) w.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        const auto b = w.find_first_of("abcdefghijklmnopqrstuvwxyz0123456789");
        const auto e = w.find_last_of("abcdefghijklmnopqrstuvwxyz0123456789");
        if (b == std::string::npos) continue;
        if (wordlists::is_stopword(std::string_view(w).substr(b, e - b + 1))) ++hits;
    }
    return total > 0 && static_cast<double>(hits) / static_cast<double>(total) >= 0.15;
}

FilterResult filter_documents(const std::vector<Document>& docs, const FilterConfig& cfg) {
    cfg.validate();
    std::vector<std::regex> patterns;
    for (const auto& p : cfg.contamination_patterns) patterns.emplace_back(p, std::regex::icase);

    FilterResult out;
    out.audit.input = docs.size();
    std::vector<const Document*> survivors;
    for (const auto& d : docs) {
        if (cfg.bot_authors.contains(d.author_id)) {
            ++out.audit.bot;
        } else if (d.server_members && *d.server_members < cfg.min_server_members) {
            ++out.audit.server_size;
        } else if (d.char_count < cfg.min_length_chars) {
            ++out.audit.length;
        } else if (d.lang_conf ? *d.lang_conf < cfg.min_lang_conf : !passes_language_heuristic(d.text)) {
            ++out.audit.language;
        } else if (std::any_of(patterns.begin(), patterns.end(),
                               [&](const std::regex& re) { return std::regex_search(d.text, re); })) {
            ++out.audit.contamination;
        } else {
            survivors.push_back(&d);
        }
    }

    // The earliest (timestamp, doc_id) copy of each content hash survives.
    std::vector<std::pair<std::uint64_t, const Document*>> keyed;
    keyed.reserve(survivors.size());
    for (const Document* d : survivors) keyed.emplace_back(content_hash(d->text), d);
    std::map<std::uint64_t, const Document*> winner;
    for (const auto& [h, d] : keyed) {
        auto [it, inserted] = winner.emplace(h, d);
        if (!inserted) {
            const Document* cur = it->second;
            if (std::tie(d->timestamp, d->doc_id) < std::tie(cur->timestamp, cur->doc_id)) it->second = d;
        }
    }
    for (const auto& [h, d] : keyed) {
        if (winner.at(h) == d) {
            out.kept.push_back(*d);
        } else {
            ++out.audit.duplicate;
        }
    }
    out.audit.kept = out.kept.size();
    return out;
}

std::map<std::string, AuthorSplit> split_by_boundary(const std::vector<Document>& docs,
                                                     const BoundaryConfig& cfg) {
    cfg.validate();
    const UnixSeconds lo = cfg.boundary_ts - cfg.halfwidth_seconds();
    const UnixSeconds hi = cfg.boundary_ts + cfg.halfwidth_seconds();
    std::map<std::string, AuthorSplit> by_author;
    for (const auto& d : docs) {
        if (d.timestamp >= lo && d.timestamp <= hi) continue;
        auto& s = by_author[d.author_id];
        (d.timestamp < lo ? s.pre : s.post).push_back(d);
    }
    const auto by_time = [](const Document& a, const Document& b) {
        return std::tie(a.timestamp, a.doc_id) < std::tie(b.timestamp, b.doc_id);
    };
    for (auto it = by_author.begin(); it != by_author.end();) {
        auto& s = it->second;
        if (s.pre.size() < static_cast<std::size_t>(cfg.min_docs_pre) ||
            s.post.size() < static_cast<std::size_t>(cfg.min_docs_post)) {
            it = by_author.erase(it);
            continue;
        }
        std::sort(s.pre.begin(), s.pre.end(), by_time);
        std::sort(s.post.begin(), s.post.end(), by_time);
        ++it;
    }
    return by_author;
}

std::map<std::string, std::size_t> allocate_quota(const std::map<std::string, std::size_t>& available,
                                                  const std::map<std::string, double>& fractions,
                                                  std::size_t target, std::vector<std::string>* warnings) {
    std::map<std::string, std::size_t> alloc;
    std::map<std::string, double> active;
    for (const auto& [cat, f] : fractions)
        if (f > 0.0) active[cat] = f;

    double remaining = static_cast<double>(target);
    bool exhausted_any = true;
    while (exhausted_any && !active.empty()) {
        exhausted_any = false;
        double total_q = 0.0;
        for (const auto& [cat, f] : active) total_q += f;
        std::vector<std::string> exhausted;
        for (const auto& [cat, f] : active) {
            const double want = f / total_q * remaining;
            const auto it = available.find(cat);
            const std::size_t have = it == available.end() ? 0 : it->second;
            if (static_cast<double>(have) < want - 1e-9) exhausted.push_back(cat);
        }
        for (const auto& cat : exhausted) {
            const auto it = available.find(cat);
            const std::size_t have = it == available.end() ? 0 : it->second;
            alloc[cat] = have;
            remaining -= static_cast<double>(have);
            active.erase(cat);
            exhausted_any = true;
            if (warnings) {
                warnings->push_back(fmt::format("stratum '{}' exhausted: took all {} documents, remaining quotas renormalized",
                                                cat, have));
            }
        }
    }
    if (active.empty()) return alloc;

    // Largest-remainder rounding of the renormalized quotas.
    double total_q = 0.0;
    for (const auto& [cat, f] : active) total_q += f;
    const auto rem_int = static_cast<std::size_t>(std::llround(std::max(remaining, 0.0)));
    std::size_t assigned = 0;
    std::vector<std::pair<double, std::string>> fracs;
    for (const auto& [cat, f] : active) {
        const double want = f / total_q * static_cast<double>(rem_int);
        const auto base = static_cast<std::size_t>(std::floor(want + 1e-9));
        alloc[cat] = base;
        assigned += base;
        fracs.emplace_back(want - static_cast<double>(base), cat);
    }
    std::stable_sort(fracs.begin(), fracs.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < rem_int && i < fracs.size(); ++i) {
        const auto& cat = fracs[i].second;
        const auto it = available.find(cat);
        if (it != available.end() && alloc[cat] < it->second) {
            ++alloc[cat];
            ++assigned;
        }
    }
    return alloc;
}

namespace {

bool by_time_then_id(const Document& a, const Document& b) {
    return std::tie(a.timestamp, a.doc_id) < std::tie(b.timestamp, b.doc_id);
}

void sample_period(const std::vector<const Document*>& docs, const QuotaConfig& quotas, Rng& rng,
                   const std::string& period, SampleResult& out) {
    std::map<std::string, std::vector<const Document*>> strata;
    std::size_t unmapped = 0;
    for (const Document* d : docs) {
        if (quotas.fractions.contains(d->category)) {
            strata[d->category].push_back(d);
        } else if (quotas.fractions.contains("Other")) {
            strata["Other"].push_back(d);
        } else {
            ++unmapped;
        }
    }
    if (unmapped > 0) {
        out.warnings.push_back(
            fmt::format("{}: {} documents in categories without a quota and no 'Other' stratum", period, unmapped));
    }

    std::map<std::string, std::size_t> available;
    for (const auto& [cat, f] : quotas.fractions) available[cat] = strata[cat].size();

    std::size_t target = 0;
    if (quotas.target_size) {
        target = *quotas.target_size;
    } else {
        bool first = true;
        for (const auto& [cat, f] : quotas.fractions) {
            if (f <= 0.0 || available[cat] == 0) continue;
            const auto fill = static_cast<std::size_t>(std::floor(static_cast<double>(available[cat]) / f + 1e-9));
            target = first ? fill : std::min(target, fill);
            first = false;
        }
    }

    std::vector<std::string> alloc_warnings;
    const auto alloc = allocate_quota(available, quotas.fractions, target, &alloc_warnings);
    for (auto& w : alloc_warnings) out.warnings.push_back(period + ": " + w);

    std::size_t taken_total = 0;
    for (const auto& [cat, k] : alloc) taken_total += k;
    for (auto& [cat, members] : strata) {
        std::sort(members.begin(), members.end(),
                  [](const Document* a, const Document* b) { return by_time_then_id(*a, *b); });
        rng.shuffle(members);
        const std::size_t k = alloc.contains(cat) ? alloc.at(cat) : 0;
        for (std::size_t i = 0; i < k && i < members.size(); ++i) out.docs.push_back(*members[i]);
        if (taken_total > 0 && quotas.fractions.at(cat) > 0.0) {
            const double got = static_cast<double>(k) / static_cast<double>(taken_total);
            if (std::abs(got - quotas.fractions.at(cat)) > quotas.tolerance) {
                out.warnings.push_back(fmt::format("{}: stratum '{}' at {:.4f} vs quota {:.4f} (tolerance {:.4f})",
                                                   period, cat, got, quotas.fractions.at(cat), quotas.tolerance));
            }
        }
    }
}

} // namespace

SampleResult stratified_sample(const std::vector<Document>& docs, const QuotaConfig& quotas, bool per_period,
                               std::uint64_t seed, UnixSeconds boundary_ts) {
    quotas.validate();
    Rng rng(seed);
    SampleResult out;
    if (per_period) {
        std::vector<const Document*> pre, post;
        for (const auto& d : docs) (d.timestamp < boundary_ts ? pre : post).push_back(&d);
        sample_period(pre, quotas, rng, "pre", out);
        sample_period(post, quotas, rng, "post", out);
    } else {
        std::vector<const Document*> all;
        for (const auto& d : docs) all.push_back(&d);
        sample_period(all, quotas, rng, "all", out);
    }
    std::sort(out.docs.begin(), out.docs.end(), by_time_then_id);
    return out;
}

namespace {

struct CalendarIndex {
    int year;
    unsigned month; // 1..12
};

CalendarIndex calendar_of(UnixSeconds ts) {
    using namespace std::chrono;
    const sys_days day = floor<days>(sys_seconds{seconds{ts}});
    const year_month_day ymd{day};
    return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month())};
}

long bucket_index(UnixSeconds ts, Granularity g) {
    const auto c = calendar_of(ts);
    if (g == Granularity::monthly) return static_cast<long>(c.year) * 12 + static_cast<long>(c.month - 1);
    return static_cast<long>(c.year) * 4 + static_cast<long>((c.month - 1) / 3);
}

std::string label_of_index(long idx, Granularity g) {
    const long per = g == Granularity::monthly ? 12 : 4;
    const long year = idx >= 0 ? idx / per : (idx - per + 1) / per;
    const long within = idx - year * per;
    if (g == Granularity::monthly) return fmt::format("{:04d}-{:02d}", year, within + 1);
    return fmt::format("{:04d}Q{}", year, within + 1);
}

} // namespace

std::string bucket_label(UnixSeconds ts, Granularity g) { return label_of_index(bucket_index(ts, g), g); }

BucketedSeries bucket_series(const std::vector<std::pair<UnixSeconds, double>>& points, Granularity g) {
    BucketedSeries out;
    out.granularity = g;
    if (points.empty()) return out;
    std::map<long, std::pair<double, std::size_t>> acc;
    for (const auto& [ts, v] : points) {
        auto& a = acc[bucket_index(ts, g)];
        a.first += v;
        ++a.second;
    }
    const long first = acc.begin()->first;
    const long last = acc.rbegin()->first;
    for (long i = first; i <= last; ++i) {
        Bucket b;
        b.label = label_of_index(i, g);
        if (auto it = acc.find(i); it != acc.end()) {
            b.count = it->second.second;
            b.mean = it->second.first / static_cast<double>(it->second.second);
        }
        out.buckets.push_back(std::move(b));
    }
    return out;
}

} // namespace stylo
