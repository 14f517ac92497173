#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stylo/common.hpp"

namespace stylo {

enum class Genre { social, formal };

std::string to_string(Genre g);
Genre genre_from_string(const std::string& s);

struct Document {
    std::string doc_id;
    std::string author_id;
    UnixSeconds timestamp = 0;
    Genre genre = Genre::social;
    std::string category;
    std::string text;
    std::optional<double> lang_conf;
    /// Member count of the hosting server, when the source provides it.
    std::optional<std::int64_t> server_members;
    std::size_t char_count = 0;
};

/// Builds a Document and derives char_count from the text.
Document make_document(std::string doc_id, std::string author_id, UnixSeconds timestamp, Genre genre,
                       std::string category, std::string text,
                       std::optional<double> lang_conf = std::nullopt);

nlohmann::json to_json(const Document& doc);
/// Throws DataError when a required field is missing or has the wrong type.
Document document_from_json(const nlohmann::json& j);

struct BoundaryConfig {
    UnixSeconds boundary_ts = 1669766400; // 2022-11-30T00:00:00Z
    int exclusion_halfwidth_days = 7;
    int min_docs_pre = 10;
    int min_docs_post = 10;

    void validate() const;
    UnixSeconds halfwidth_seconds() const { return exclusion_halfwidth_days * kSecondsPerDay; }
};

struct FilterConfig {
    std::size_t min_length_chars = 50;
    double min_lang_conf = 0.95;
    std::vector<std::string> contamination_patterns = default_contamination_patterns();
    std::int64_t min_server_members = 100;
    std::set<std::string> bot_authors;

    static std::vector<std::string> default_contamination_patterns();
    void validate() const;
};

struct QuotaConfig {
    std::map<std::string, double> fractions;
    double tolerance = 0.02;
    /// Per-period sample size. When absent, the largest size every quota can fill.
    std::optional<std::size_t> target_size;

    static QuotaConfig paper_defaults();
    void validate() const;
};

struct LoadWarning {
    std::size_t line = 0;
    std::string message;
};

struct LoadResult {
    std::vector<Document> docs;
    std::vector<LoadWarning> warnings;
};

/// Reads a JSON-lines corpus. Malformed lines are skipped and reported.
LoadResult load_corpus(const std::filesystem::path& path);
LoadResult parse_corpus(std::istream& in);
void write_corpus(const std::filesystem::path& path, const std::vector<Document>& docs);

/// One author id per line; blank lines and '#' comments are ignored.
std::set<std::string> load_bot_list(const std::filesystem::path& path);

struct FilterAudit {
    std::size_t input = 0;
    std::size_t bot = 0;
    std::size_t server_size = 0;
    std::size_t length = 0;
    std::size_t language = 0;
    std::size_t contamination = 0;
    std::size_t duplicate = 0;
    std::size_t kept = 0;

    nlohmann::json to_json() const;
};

struct FilterResult {
    std::vector<Document> kept;
    FilterAudit audit;
};

/// Dedup key: lowercased, NFC-normalized, whitespace-collapsed text hashed with FNV-1a.
std::uint64_t content_hash(std::string_view text);

/// Dependency-free English check used when lang_conf is absent.
bool passes_language_heuristic(std::string_view text);

/// Rules run in order bot, server size, length, language, contamination, dedup.
/// Kept documents preserve input order.
FilterResult filter_documents(const std::vector<Document>& docs, const FilterConfig& cfg);

struct AuthorSplit {
    std::vector<Document> pre;
    std::vector<Document> post;
};

/// Drops documents inside [boundary - w, boundary + w] and authors below the
/// per-period minimums. Each side is sorted by (timestamp, doc_id).
std::map<std::string, AuthorSplit> split_by_boundary(const std::vector<Document>& docs,
                                                     const BoundaryConfig& cfg);

struct SampleResult {
    std::vector<Document> docs;
    std::vector<std::string> warnings;
};

/// Topic-balanced sampling by category. With `per_period`, documents before
/// and after `boundary_ts` are balanced independently.
SampleResult stratified_sample(const std::vector<Document>& docs, const QuotaConfig& quotas,
                               bool per_period, std::uint64_t seed,
                               UnixSeconds boundary_ts = BoundaryConfig{}.boundary_ts);

/// Per-stratum allocation used by stratified_sample; exposed for testing.
/// Exhausted strata take everything and the remaining quota is renormalized.
std::map<std::string, std::size_t> allocate_quota(const std::map<std::string, std::size_t>& available,
                                                  const std::map<std::string, double>& fractions,
                                                  std::size_t target, std::vector<std::string>* warnings);

enum class Granularity { monthly, quarterly };

struct Bucket {
    std::string label;
    std::size_t count = 0;
    std::optional<double> mean; ///< nullopt marks an empty interior bucket
};

struct BucketedSeries {
    Granularity granularity = Granularity::monthly;
    std::vector<Bucket> buckets;
};

/// "2023-01" for monthly, "2023Q1" for quarterly (UTC calendar).
std::string bucket_label(UnixSeconds ts, Granularity g);

/// Calendar-aligned bucket means of (timestamp, value) pairs.
BucketedSeries bucket_series(const std::vector<std::pair<UnixSeconds, double>>& points, Granularity g);

template <typename ValueOf>
BucketedSeries bucket_series(const std::vector<Document>& docs, ValueOf value_of, Granularity g) {
    std::vector<std::pair<UnixSeconds, double>> pts;
    pts.reserve(docs.size());
    for (const auto& d : docs) {
        std::optional<double> v = value_of(d);
        if (v) pts.emplace_back(d.timestamp, *v);
    }
    return bucket_series(pts, g);
}

} // namespace stylo
