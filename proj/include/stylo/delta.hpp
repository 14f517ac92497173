#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "stylo/corpus.hpp"
#include "stylo/stylometry.hpp"

namespace stylo {

/// Components of the change vector, in output column order.
enum class Feature : std::size_t { ppl, ttr, fkgl, passive, firstperson, punct, sentlen, ai_topic_share };
inline constexpr std::size_t kFeatureCount = 8;
/// The seven stylometric components; ai_topic_share is the theme axis.
inline constexpr std::size_t kStyleFeatureCount = 7;

std::string_view delta_column_name(Feature f); ///< "d_ppl", "d_ttr", ...
std::string_view feature_name(Feature f);      ///< "ppl", "ttr", ...
constexpr std::size_t idx(Feature f) { return static_cast<std::size_t>(f); }

using FeatureValues = std::array<std::optional<double>, kFeatureCount>;

/// Joins per-document stylometry with the document's perplexity gap.
FeatureValues feature_values(const FeatureRecord& rec, std::optional<double> delta_ppl);

struct PeriodMeans {
    FeatureValues pre;
    FeatureValues post;
    std::size_t n_pre = 0;
    std::size_t n_post = 0;
};

/// Per-period feature means, skipping missing values.
PeriodMeans period_means(const std::vector<FeatureValues>& pre, const std::vector<FeatureValues>& post);

struct AuthorDelta {
    std::string author_id;
    FeatureValues d;
    std::array<bool, kFeatureCount> degenerate{};
    std::size_t n_pre = 0;
    std::size_t n_post = 0;

    bool complete() const;
};

/// Post-minus-pre mean difference of within-author z-scored values (pooled
/// pre+post docs, sample SD). A feature with no valid docs in either period
/// stays missing; zero within-author SD yields 0 with the degeneracy flag.
AuthorDelta raw_delta(std::string author_id, const std::vector<FeatureValues>& pre,
                      const std::vector<FeatureValues>& post);

/// Raw deltas for every author in the split, ordered by author_id.
std::vector<AuthorDelta> compute_raw_deltas(const std::map<std::string, AuthorSplit>& split,
                                            const std::map<std::string, FeatureValues>& doc_values);

struct FeatureStandardization {
    std::string name;
    std::optional<double> lower;  ///< 2.5th percentile before clipping
    std::optional<double> upper;  ///< 97.5th percentile before clipping
    double mean = 0.0;            ///< population mean after clipping
    double sd = 0.0;              ///< population SD after clipping
    std::size_t winsorized = 0;
    bool dropped = false;
};

struct StandardizationReport {
    std::array<FeatureStandardization, kFeatureCount> features;
    std::vector<std::string> excluded_authors;
    bool clipping_skipped = false;
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
};

struct StandardizedDeltas {
    /// Complete authors only; dropped features hold nullopt in every row.
    std::vector<AuthorDelta> rows;
    StandardizationReport report;

    bool active(Feature f) const { return !report.features[idx(f)].dropped; }
};

struct StandardizeConfig {
    double lower_pct = 0.025;
    double upper_pct = 0.975;
    std::size_t min_authors_for_clipping = 40;
};

/// Cross-author winsorization then population z-scoring, column by column.
StandardizedDeltas winsorize_and_standardize(const std::vector<AuthorDelta>& raw, const StandardizeConfig& cfg = {});

struct ClusterInput {
    std::vector<std::string> author_ids;
    std::vector<std::string> columns;
    Eigen::MatrixXd points; ///< one row per author
};

/// Active standardized columns; the theme column only when `include_theme`.
ClusterInput clustering_matrix(const StandardizedDeltas& deltas, bool include_theme);

/// author_id, d_ppl, d_ttr, d_fkgl, d_passive, d_firstperson, d_punct,
/// d_sentlen, d_ai_topic_share, n_pre, n_post.
void write_author_deltas_csv(const std::filesystem::path& path, const std::vector<AuthorDelta>& rows);
std::vector<AuthorDelta> read_author_deltas_csv(const std::filesystem::path& path);

} // namespace stylo
