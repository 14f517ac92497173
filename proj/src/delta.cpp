#include "stylo/delta.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "stylo/io.hpp"

namespace stylo {

namespace {

constexpr std::array<std::string_view, kFeatureCount> kDeltaNames = {
    "d_ppl", "d_ttr", "d_fkgl", "d_passive", "d_firstperson", "d_punct", "d_sentlen", "d_ai_topic_share"};
constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "ppl", "ttr", "fkgl", "passive", "firstperson", "punct", "sentlen", "ai_topic_share"};

std::vector<double> valid_column(const std::vector<FeatureValues>& docs, std::size_t f) {
    std::vector<double> out;
    for (const auto& v : docs)
        if (v[f]) out.push_back(*v[f]);
    return out;
}

// Summation over sorted values makes the result independent of input order.
double sorted_mean(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

} // namespace

std::string_view delta_column_name(Feature f) { return kDeltaNames[idx(f)]; }
std::string_view feature_name(Feature f) { return kFeatureNames[idx(f)]; }

FeatureValues feature_values(const FeatureRecord& rec, std::optional<double> delta_ppl) {
    FeatureValues v;
    v[idx(Feature::ppl)] = delta_ppl;
    v[idx(Feature::ttr)] = rec.ttr;
    v[idx(Feature::fkgl)] = rec.fkgl;
    v[idx(Feature::passive)] = rec.passive_pct;
    v[idx(Feature::firstperson)] = rec.first_person_pct;
    v[idx(Feature::punct)] = rec.punct_density;
    v[idx(Feature::sentlen)] = rec.mean_sent_len;
    v[idx(Feature::ai_topic_share)] = rec.ai_topic_share;
    return v;
}

PeriodMeans period_means(const std::vector<FeatureValues>& pre, const std::vector<FeatureValues>& post) {
    PeriodMeans m;
    m.n_pre = pre.size();
    m.n_post = post.size();
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        m.pre[f] = mean_of(valid_column(pre, f));
        m.post[f] = mean_of(valid_column(post, f));
    }
    return m;
}

bool AuthorDelta::complete() const {
    return std::all_of(d.begin(), d.end(), [](const auto& v) { return v.has_value(); });
}

AuthorDelta raw_delta(std::string author_id, const std::vector<FeatureValues>& pre,
                      const std::vector<FeatureValues>& post) {
    AuthorDelta out;
    out.author_id = std::move(author_id);
    out.n_pre = pre.size();
    out.n_post = post.size();
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        const auto a = valid_column(pre, f);
        const auto b = valid_column(post, f);
        if (a.empty() || b.empty()) continue;
        std::vector<double> pooled = a;
        pooled.insert(pooled.end(), b.begin(), b.end());
        std::sort(pooled.begin(), pooled.end());
        const double mu = sorted_mean(pooled);
        double ss = 0.0;
        for (double x : pooled) ss += (x - mu) * (x - mu);
        const double sd = std::sqrt(ss / static_cast<double>(pooled.size() - 1));
        if (sd < 1e-12) {
            out.d[f] = 0.0;
            out.degenerate[f] = true;
            continue;
        }
        out.d[f] = (sorted_mean(b) - sorted_mean(a)) / sd;
    }
    return out;
}

std::vector<AuthorDelta> compute_raw_deltas(const std::map<std::string, AuthorSplit>& split,
                                            const std::map<std::string, FeatureValues>& doc_values) {
    std::vector<AuthorDelta> out;
    auto collect = [&](const std::vector<Document>& docs) {
        std::vector<FeatureValues> vals;
        for (const auto& d : docs)
            if (auto it = doc_values.find(d.doc_id); it != doc_values.end()) vals.push_back(it->second);
        return vals;
    };
    for (const auto& [author, s] : split) out.push_back(raw_delta(author, collect(s.pre), collect(s.post)));
    return out;
}

nlohmann::json StandardizationReport::to_json() const {
    nlohmann::json feats = nlohmann::json::array();
    for (const auto& f : features) {
        feats.push_back({{"feature", f.name},
                         {"lower", f.lower ? nlohmann::json(*f.lower) : nlohmann::json(nullptr)},
                         {"upper", f.upper ? nlohmann::json(*f.upper) : nlohmann::json(nullptr)},
                         {"mean", f.mean},
                         {"sd", f.sd},
                         {"winsorized", f.winsorized},
                         {"dropped", f.dropped}});
    }
    return {{"features", feats},
            {"excluded_authors", excluded_authors},
            {"clipping_skipped", clipping_skipped},
            {"warnings", warnings}};
}

StandardizedDeltas winsorize_and_standardize(const std::vector<AuthorDelta>& raw, const StandardizeConfig& cfg) {
    StandardizedDeltas out;
    auto& rep = out.report;
    for (const auto& a : raw) {
        if (a.complete()) {
            out.rows.push_back(a);
        } else {
            rep.excluded_authors.push_back(a.author_id);
        }
    }
    const std::size_t n = out.rows.size();
    if (n < cfg.min_authors_for_clipping) {
        rep.clipping_skipped = true;
        rep.warnings.push_back(fmt::format("{} complete authors (< {}): winsorization skipped", n,
                                           cfg.min_authors_for_clipping));
    }
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        auto& fr = rep.features[f];
        fr.name = std::string(kDeltaNames[f]);
        if (n == 0) {
            fr.dropped = true;
            continue;
        }
        std::vector<double> col(n);
        for (std::size_t i = 0; i < n; ++i) col[i] = *out.rows[i].d[f];
        if (!rep.clipping_skipped) {
            const double lo = percentile_linear(col, cfg.lower_pct);
            const double hi = percentile_linear(col, cfg.upper_pct);
            fr.lower = lo;
            fr.upper = hi;
            for (double& v : col) {
                if (v < lo || v > hi) ++fr.winsorized;
                v = std::clamp(v, lo, hi);
            }
        }
        const double mu = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(n);
        double ss = 0.0;
        for (double v : col) ss += (v - mu) * (v - mu);
        const double sd = std::sqrt(ss / static_cast<double>(n));
        fr.mean = mu;
        fr.sd = sd;
        if (!(sd > 1e-12)) {
            fr.dropped = true;
            rep.warnings.push_back(fmt::format("{} has zero cross-author SD and was dropped", fr.name));
            for (auto& row : out.rows) row.d[f] = std::nullopt;
            continue;
        }
        for (std::size_t i = 0; i < n; ++i) out.rows[i].d[f] = (col[i] - mu) / sd;
    }
    return out;
}

ClusterInput clustering_matrix(const StandardizedDeltas& deltas, bool include_theme) {
    ClusterInput in;
    std::vector<std::size_t> cols;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        if (!include_theme && f == idx(Feature::ai_topic_share)) continue;
        if (deltas.report.features[f].dropped) continue;
        cols.push_back(f);
        in.columns.emplace_back(kDeltaNames[f]);
    }
    in.points.resize(static_cast<Eigen::Index>(deltas.rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < deltas.rows.size(); ++i) {
        in.author_ids.push_back(deltas.rows[i].author_id);
        for (std::size_t c = 0; c < cols.size(); ++c)
            in.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = *deltas.rows[i].d[cols[c]];
    }
    return in;
}

void write_author_deltas_csv(const std::filesystem::path& path, const std::vector<AuthorDelta>& rows) {
    std::string s = "author_id";
    for (auto name : kDeltaNames) s += fmt::format(",{}", name);
    s += ",n_pre,n_post\n";
    for (const auto& r : rows) {
        s += csv_escape(r.author_id);
        for (const auto& v : r.d) s += "," + cell(v);
        s += fmt::format(",{},{}\n", r.n_pre, r.n_post);
    }
    write_file(path, s);
}

std::vector<AuthorDelta> read_author_deltas_csv(const std::filesystem::path& path) {
    const auto t = read_csv(path);
    std::array<std::size_t, kFeatureCount> cols{};
    for (std::size_t f = 0; f < kFeatureCount; ++f) cols[f] = t.column(kDeltaNames[f]);
    const auto c_id = t.column("author_id"), c_pre = t.column("n_pre"), c_post = t.column("n_post");
    std::vector<AuthorDelta> out;
    for (const auto& row : t.rows) {
        AuthorDelta a;
        a.author_id = row[c_id];
        for (std::size_t f = 0; f < kFeatureCount; ++f) a.d[f] = parse_cell(row[cols[f]]);
        a.n_pre = static_cast<std::size_t>(std::stoull(row[c_pre]));
        a.n_post = static_cast<std::size_t>(std::stoull(row[c_post]));
        out.push_back(std::move(a));
    }
    return out;
}

} // namespace stylo
