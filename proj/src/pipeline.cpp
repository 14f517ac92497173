#include "stylo/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "stylo/ai_likeness.hpp"
#include "stylo/io.hpp"
#include "stylo/stats.hpp"
#include "stylo/stylometry.hpp"
#include "stylo/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace stylo {

// ---------------------------------------------------------------- config

namespace {

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
    if (!j.is_object()) throw ConfigError(fmt::format("config section '{}' must be an object", where));
    for (const auto& [k, v] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
            throw ConfigError(fmt::format("unknown config key '{}' in '{}'", k, where));
    }
}

template <typename T>
void read_opt(const json& j, const char* key, T& out, std::string_view where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(fmt::format("config value '{}.{}' has the wrong type", where, key));
    }
}

std::string granularity_name(Granularity g) { return g == Granularity::monthly ? "monthly" : "quarterly"; }

} // namespace

RunConfig RunConfig::from_json(const json& j) {
    RunConfig c;
    check_keys(j, {"inputs", "filter", "boundary", "sampling", "lexicon", "time_bucketing", "pelt", "standardize",
                   "hdbscan", "bootstrap", "naming", "seeds", "synth", "jobs"},
               "root");
    if (j.contains("inputs")) {
        const auto& s = j["inputs"];
        check_keys(s, {"corpus", "logprobs", "bot_list", "judge_model_id", "current_model_id"}, "inputs");
        read_opt(s, "corpus", c.inputs.corpus, "inputs");
        read_opt(s, "logprobs", c.inputs.logprobs, "inputs");
        read_opt(s, "bot_list", c.inputs.bot_list, "inputs");
        read_opt(s, "judge_model_id", c.inputs.judge_model_id, "inputs");
        read_opt(s, "current_model_id", c.inputs.current_model_id, "inputs");
    }
    if (j.contains("filter")) {
        const auto& s = j["filter"];
        check_keys(s, {"min_length_chars", "min_lang_conf", "contamination_patterns", "min_server_members"}, "filter");
        read_opt(s, "min_length_chars", c.filter.min_length_chars, "filter");
        read_opt(s, "min_lang_conf", c.filter.min_lang_conf, "filter");
        read_opt(s, "contamination_patterns", c.filter.contamination_patterns, "filter");
        read_opt(s, "min_server_members", c.filter.min_server_members, "filter");
    }
    if (j.contains("boundary")) {
        const auto& s = j["boundary"];
        check_keys(s, {"boundary_ts", "exclusion_halfwidth_days", "min_docs_pre", "min_docs_post"}, "boundary");
        read_opt(s, "boundary_ts", c.boundary.boundary_ts, "boundary");
        read_opt(s, "exclusion_halfwidth_days", c.boundary.exclusion_halfwidth_days, "boundary");
        read_opt(s, "min_docs_pre", c.boundary.min_docs_pre, "boundary");
        read_opt(s, "min_docs_post", c.boundary.min_docs_post, "boundary");
    }
    if (j.contains("sampling")) {
        const auto& s = j["sampling"];
        check_keys(s, {"enabled", "per_period", "fractions", "tolerance", "target_size"}, "sampling");
        read_opt(s, "enabled", c.sampling.enabled, "sampling");
        read_opt(s, "per_period", c.sampling.per_period, "sampling");
        read_opt(s, "fractions", c.sampling.quotas.fractions, "sampling");
        read_opt(s, "tolerance", c.sampling.quotas.tolerance, "sampling");
        if (s.contains("target_size") && !s["target_size"].is_null()) {
            std::size_t t = 0;
            read_opt(s, "target_size", t, "sampling");
            c.sampling.quotas.target_size = t;
        }
    }
    if (j.contains("lexicon")) {
        const auto& s = j["lexicon"];
        check_keys(s, {"path", "threshold"}, "lexicon");
        read_opt(s, "path", c.lexicon_path, "lexicon");
        if (s.contains("threshold") && !s["threshold"].is_null()) {
            double t = 0.0;
            read_opt(s, "threshold", t, "lexicon");
            c.lexicon_threshold = t;
        }
    }
    if (j.contains("time_bucketing")) {
        std::string g;
        read_opt(j, "time_bucketing", g, "root");
        if (g == "monthly") c.granularity = Granularity::monthly;
        else if (g == "quarterly") c.granularity = Granularity::quarterly;
        else throw ConfigError(fmt::format("time_bucketing must be 'monthly' or 'quarterly', got '{}'", g));
    }
    if (j.contains("pelt")) {
        const auto& s = j["pelt"];
        check_keys(s, {"penalty_coeff", "min_size", "jump"}, "pelt");
        read_opt(s, "penalty_coeff", c.pelt.penalty_coeff, "pelt");
        read_opt(s, "min_size", c.pelt.min_size, "pelt");
        read_opt(s, "jump", c.pelt.jump, "pelt");
    }
    if (j.contains("standardize")) {
        const auto& s = j["standardize"];
        check_keys(s, {"lower_pct", "upper_pct", "min_authors_for_clipping"}, "standardize");
        read_opt(s, "lower_pct", c.standardize.lower_pct, "standardize");
        read_opt(s, "upper_pct", c.standardize.upper_pct, "standardize");
        read_opt(s, "min_authors_for_clipping", c.standardize.min_authors_for_clipping, "standardize");
    }
    if (j.contains("hdbscan")) {
        const auto& s = j["hdbscan"];
        check_keys(s, {"min_cluster_size", "min_samples", "alpha", "include_theme"}, "hdbscan");
        read_opt(s, "min_cluster_size", c.hdbscan.min_cluster_size, "hdbscan");
        read_opt(s, "min_samples", c.hdbscan.min_samples, "hdbscan");
        read_opt(s, "alpha", c.hdbscan.alpha, "hdbscan");
        read_opt(s, "include_theme", c.cluster_include_theme, "hdbscan");
    }
    if (j.contains("bootstrap")) {
        const auto& s = j["bootstrap"];
        check_keys(s, {"iterations", "sample_ratio", "ari_threshold"}, "bootstrap");
        read_opt(s, "iterations", c.bootstrap.iterations, "bootstrap");
        read_opt(s, "sample_ratio", c.bootstrap.sample_ratio, "bootstrap");
        read_opt(s, "ari_threshold", c.bootstrap.ari_threshold, "bootstrap");
    }
    if (j.contains("naming")) {
        const auto& s = j["naming"];
        check_keys(s, {"style_threshold"}, "naming");
        read_opt(s, "style_threshold", c.naming.style_threshold, "naming");
    }
    if (j.contains("seeds")) {
        const auto& s = j["seeds"];
        check_keys(s, {"main", "robustness", "validation"}, "seeds");
        read_opt(s, "main", c.seeds.main, "seeds");
        read_opt(s, "robustness", c.seeds.robustness, "seeds");
        read_opt(s, "validation", c.seeds.validation, "seeds");
    }
    if (j.contains("synth")) {
        const auto& s = j["synth"];
        check_keys(s, {"per_archetype", "noise_authors", "docs_per_author_per_period"}, "synth");
        read_opt(s, "per_archetype", c.synth.per_archetype, "synth");
        read_opt(s, "noise_authors", c.synth.noise_authors, "synth");
        read_opt(s, "docs_per_author_per_period", c.synth.docs_per_author_per_period, "synth");
    }
    read_opt(j, "jobs", c.jobs, "root");
    c.bootstrap.seed = c.seeds.robustness;
    c.validate();
    return c;
}

RunConfig RunConfig::load(const fs::path& path) {
    if (!fs::exists(path)) throw ConfigError(fmt::format("config file {} does not exist", path.string()));
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("config file {}: {}", path.string(), e.what()));
    }
    return from_json(j);
}

json RunConfig::to_json() const {
    json target = sampling.quotas.target_size ? json(*sampling.quotas.target_size) : json(nullptr);
    json threshold = lexicon_threshold ? json(*lexicon_threshold) : json(nullptr);
    return {
        {"inputs",
         {{"corpus", inputs.corpus},
          {"logprobs", inputs.logprobs},
          {"bot_list", inputs.bot_list},
          {"judge_model_id", inputs.judge_model_id},
          {"current_model_id", inputs.current_model_id}}},
        {"filter",
         {{"min_length_chars", filter.min_length_chars},
          {"min_lang_conf", filter.min_lang_conf},
          {"contamination_patterns", filter.contamination_patterns},
          {"min_server_members", filter.min_server_members}}},
        {"boundary",
         {{"boundary_ts", boundary.boundary_ts},
          {"exclusion_halfwidth_days", boundary.exclusion_halfwidth_days},
          {"min_docs_pre", boundary.min_docs_pre},
          {"min_docs_post", boundary.min_docs_post}}},
        {"sampling",
         {{"enabled", sampling.enabled},
          {"per_period", sampling.per_period},
          {"fractions", sampling.quotas.fractions},
          {"tolerance", sampling.quotas.tolerance},
          {"target_size", target}}},
        {"lexicon", {{"path", lexicon_path}, {"threshold", threshold}}},
        {"time_bucketing", granularity_name(granularity)},
        {"pelt", {{"penalty_coeff", pelt.penalty_coeff}, {"min_size", pelt.min_size}, {"jump", pelt.jump}}},
        {"standardize",
         {{"lower_pct", standardize.lower_pct},
          {"upper_pct", standardize.upper_pct},
          {"min_authors_for_clipping", standardize.min_authors_for_clipping}}},
        {"hdbscan",
         {{"min_cluster_size", hdbscan.min_cluster_size},
          {"min_samples", hdbscan.min_samples},
          {"alpha", hdbscan.alpha},
          {"include_theme", cluster_include_theme}}},
        {"bootstrap",
         {{"iterations", bootstrap.iterations},
          {"sample_ratio", bootstrap.sample_ratio},
          {"ari_threshold", bootstrap.ari_threshold}}},
        {"naming", {{"style_threshold", naming.style_threshold}}},
        {"seeds", {{"main", seeds.main}, {"robustness", seeds.robustness}, {"validation", seeds.validation}}},
        {"synth",
         {{"per_archetype", synth.per_archetype},
          {"noise_authors", synth.noise_authors},
          {"docs_per_author_per_period", synth.docs_per_author_per_period}}},
    };
}

void RunConfig::validate() const {
    filter.validate();
    boundary.validate();
    if (sampling.enabled) sampling.quotas.validate();
    pelt.validate();
    hdbscan.validate();
    if (!(standardize.lower_pct >= 0.0 && standardize.lower_pct < standardize.upper_pct && standardize.upper_pct <= 1.0))
        throw ConfigError("standardize percentiles must satisfy 0 <= lower < upper <= 1");
    if (!(bootstrap.sample_ratio > 0.0 && bootstrap.sample_ratio <= 1.0))
        throw ConfigError("bootstrap sample_ratio must be in (0, 1]");
    if (!(naming.style_threshold >= 0.0)) throw ConfigError("naming style_threshold must be >= 0");
    if (lexicon_threshold && !(*lexicon_threshold >= 0.0 && *lexicon_threshold <= 1.0))
        throw ConfigError("lexicon threshold must be in [0, 1]");
    if (synth.docs_per_author_per_period < 2) throw ConfigError("synth docs_per_author_per_period must be >= 2");
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
    if (inputs.judge_model_id == inputs.current_model_id)
        spdlog::warn("judge and current model ids are identical; every perplexity gap will be 0");
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DependencyError*>(&e)) return 2;
    return 1;
}

// ---------------------------------------------------------------- stages

namespace {

std::string file_hash(const fs::path& p) { return hex64(fnv1a64(read_file(p))); }

class Stage {
public:
    Stage(std::string name, const fs::path& run_dir, std::string config_hash)
        : name_(std::move(name)), run_dir_(run_dir), config_hash_(std::move(config_hash)),
          start_(std::chrono::steady_clock::now()) {}

    /// Artifact produced by an earlier command inside the run directory.
    fs::path artifact(const std::string& rel, std::string_view producer) {
        const fs::path p = run_dir_ / rel;
        if (!fs::exists(p))
            throw DependencyError(fmt::format("`{}` needs {} which is produced by `stylo {}`; run that command first",
                                              name_, rel, producer));
        inputs_[rel] = file_hash(p);
        return p;
    }

    /// External input named in the config.
    fs::path external(const std::string& path, std::string_view key, std::string_view hint) {
        if (path.empty()) throw ConfigError(fmt::format("`{}` needs inputs.{} to be set in the config", name_, key));
        if (!fs::exists(path)) throw DependencyError(fmt::format("`{}` input {} not found ({})", name_, path, hint));
        inputs_[path] = file_hash(path);
        return path;
    }

    /// Writes an output once. An existing file with identical bytes is accepted.
    void write(const std::string& rel, const std::string& contents) {
        const fs::path p = run_dir_ / rel;
        fs::create_directories(p.parent_path());
        if (fs::exists(p)) {
            if (read_file(p) != contents)
                throw ConfigError(fmt::format("{} already exists with different contents; outputs are write-once, "
                                              "use a fresh --out directory",
                                              p.string()));
        } else {
            write_file(p, contents);
        }
        outputs_[rel] = hex64(fnv1a64(contents));
    }

    /// Renders through a path-based writer, then commits like write().
    void write_via(const std::string& rel, const std::function<void(const fs::path&)>& render) {
        const fs::path tmp = run_dir_ / (rel + ".partial");
        fs::create_directories(tmp.parent_path());
        render(tmp);
        const std::string contents = read_file(tmp);
        fs::remove(tmp);
        write(rel, contents);
    }

    void write_json(const std::string& rel, const json& j) { write(rel, j.dump(2) + "\n"); }

    void finish() {
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        const json entry = {{"command", name_},
                            {"config_hash", config_hash_},
                            {"inputs", inputs_},
                            {"outputs", outputs_},
                            {"wall_time_s", secs}};
        std::ofstream out(run_dir_ / "manifest.jsonl", std::ios::app | std::ios::binary);
        out << entry.dump() << '\n';
        if (!out) throw DataError("cannot append to manifest.jsonl");
        spdlog::info("{}: done in {:.2f}s ({} outputs)", name_, secs, outputs_.size());
    }

private:
    std::string name_;
    fs::path run_dir_;
    std::string config_hash_;
    std::chrono::steady_clock::time_point start_;
    std::map<std::string, std::string> inputs_;
    std::map<std::string, std::string> outputs_;
};

constexpr const char* kCorpus = "ingest/corpus.jsonl";
constexpr const char* kFeatures = "features/features.csv";
constexpr const char* kAiLikeness = "deltas/ai_likeness.csv";
constexpr const char* kDeltas = "deltas/author_deltas.csv";
constexpr const char* kSeries = "changepoint/series.csv";
constexpr const char* kBreaks = "changepoint/breaks.json";
constexpr const char* kAssignments = "cluster/assignments.csv";

std::vector<Document> load_docs(const fs::path& p) {
    auto lr = load_corpus(p);
    for (const auto& w : lr.warnings) spdlog::warn("{}:{}: {}", p.string(), w.line, w.message);
    return std::move(lr.docs);
}

std::map<std::string, FeatureRecord> features_by_doc(const fs::path& p) {
    std::map<std::string, FeatureRecord> out;
    for (auto& r : read_features_csv(p)) out.emplace(r.doc_id, std::move(r));
    return out;
}

// doc_id -> (delta_ppl, ai_likeness)
struct AiRow {
    std::optional<double> delta_ppl;
    std::optional<double> ai_likeness;
};

std::map<std::string, AiRow> read_ai_likeness(const fs::path& p) {
    const auto t = read_csv(p);
    const auto c_id = t.column("doc_id"), c_gap = t.column("delta_ppl"), c_ai = t.column("ai_likeness");
    std::map<std::string, AiRow> out;
    for (const auto& row : t.rows) out[row.at(c_id)] = {parse_cell(row.at(c_gap)), parse_cell(row.at(c_ai))};
    return out;
}

const std::vector<std::pair<std::string, std::function<std::optional<double>(const FeatureRecord&)>>>& feature_accessors() {
    static const std::vector<std::pair<std::string, std::function<std::optional<double>(const FeatureRecord&)>>> v = {
        {"ttr", [](const FeatureRecord& r) { return r.ttr; }},
        {"fkgl", [](const FeatureRecord& r) { return r.fkgl; }},
        {"passive_pct", [](const FeatureRecord& r) { return r.passive_pct; }},
        {"first_person_pct", [](const FeatureRecord& r) { return r.first_person_pct; }},
        {"punct_density", [](const FeatureRecord& r) { return r.punct_density; }},
        {"mean_sent_len", [](const FeatureRecord& r) { return r.mean_sent_len; }},
        {"ai_topic_share", [](const FeatureRecord& r) { return r.ai_topic_share; }},
    };
    return v;
}

// All analysed variables of one document: AI-likeness first, then stylometry.
std::vector<std::pair<std::string, std::optional<double>>> doc_variables(const Document& d,
                                                                         const std::map<std::string, FeatureRecord>& feats,
                                                                         const std::map<std::string, AiRow>& ai) {
    std::vector<std::pair<std::string, std::optional<double>>> out;
    const auto a = ai.find(d.doc_id);
    out.emplace_back("ai_likeness", a != ai.end() ? a->second.ai_likeness : std::nullopt);
    const auto f = feats.find(d.doc_id);
    for (const auto& [name, get] : feature_accessors())
        out.emplace_back(name, f != feats.end() ? get(f->second) : std::nullopt);
    return out;
}

void stage_ingest(const RunConfig& cfg, Stage& st) {
    const auto corpus_path = st.external(cfg.inputs.corpus, "corpus", "generate one with `stylo synth`");
    auto lr = load_corpus(corpus_path);
    json load_warnings = json::array();
    for (const auto& w : lr.warnings) {
        spdlog::warn("{}:{}: {}", corpus_path.string(), w.line, w.message);
        load_warnings.push_back({{"line", w.line}, {"message", w.message}});
    }
    FilterConfig fcfg = cfg.filter;
    if (!cfg.inputs.bot_list.empty()) fcfg.bot_authors = load_bot_list(st.external(cfg.inputs.bot_list, "bot_list", ""));
    auto fr = filter_documents(lr.docs, fcfg);
    std::vector<Document> docs = std::move(fr.kept);

    json sampling = {{"enabled", cfg.sampling.enabled}};
    if (cfg.sampling.enabled) {
        auto sr = stratified_sample(docs, cfg.sampling.quotas, cfg.sampling.per_period, cfg.seeds.main,
                                    cfg.boundary.boundary_ts);
        for (const auto& w : sr.warnings) spdlog::warn("sampling: {}", w);
        sampling["warnings"] = sr.warnings;
        sampling["input"] = docs.size();
        sampling["output"] = sr.docs.size();
        docs = std::move(sr.docs);
    }
    spdlog::info("ingest: {} of {} documents kept", docs.size(), lr.docs.size());
    st.write_via(kCorpus, [&](const fs::path& p) { write_corpus(p, docs); });
    st.write_json("ingest/audit.json", {{"loaded", lr.docs.size()},
                                        {"load_warnings", load_warnings},
                                        {"filter", fr.audit.to_json()},
                                        {"sampling", sampling},
                                        {"output_documents", docs.size()}});
}

void stage_features(const RunConfig& cfg, Stage& st) {
    const auto docs = load_docs(st.artifact(kCorpus, "ingest"));
    Lexicon base = cfg.lexicon_path.empty() ? Lexicon::defaults()
                                            : Lexicon::from_json_file(st.external(cfg.lexicon_path, "lexicon.path", ""));
    if (cfg.lexicon_threshold) base.threshold = *cfg.lexicon_threshold;
    const Lexicon lex = build_lexicon(docs, base);
    const auto records = extract_all(docs, lex, cfg.jobs);
    spdlog::info("features: {} documents", records.size());
    st.write_via(kFeatures, [&](const fs::path& p) { write_features_csv(p, records); });
    st.write_json("features/lexicon.json", lex.to_json());
}

void stage_deltas(const RunConfig& cfg, Stage& st) {
    const auto docs = load_docs(st.artifact(kCorpus, "ingest"));
    const auto feats = features_by_doc(st.artifact(kFeatures, "features"));
    const auto records = load_logprobs(
        st.external(cfg.inputs.logprobs, "logprobs", "produced by the external scorer or by `stylo synth`"));
    const auto join = join_gaps(docs, records, cfg.inputs.judge_model_id, cfg.inputs.current_model_id);
    for (const auto& w : join.warnings) spdlog::warn("deltas: {}", w);

    std::map<std::string, std::vector<GapEntry>> gaps;
    for (const auto& d : docs) {
        const auto it = join.delta_ppl.find(d.doc_id);
        if (it == join.delta_ppl.end()) continue;
        gaps[d.author_id].push_back(
            {d.doc_id, it->second, d.timestamp < cfg.boundary.boundary_ts ? Period::pre : Period::post});
    }
    const auto ai = ai_likeness_index(gaps);
    for (const auto& w : ai.warnings) spdlog::warn("ai_likeness: {}", w);

    std::string ai_csv = "doc_id,author_id,timestamp,period,delta_ppl,ai_likeness\n";
    for (const auto& d : docs) {
        const auto g = join.delta_ppl.find(d.doc_id);
        const auto z = ai.index.find(d.doc_id);
        ai_csv += fmt::format("{},{},{},{},{},{}\n", csv_escape(d.doc_id), csv_escape(d.author_id), d.timestamp,
                              d.timestamp < cfg.boundary.boundary_ts ? "pre" : "post",
                              cell(g != join.delta_ppl.end() ? std::optional(g->second) : std::nullopt),
                              cell(z != ai.index.end() ? std::optional(z->second) : std::nullopt));
    }

    const auto split = split_by_boundary(docs, cfg.boundary);
    std::map<std::string, FeatureValues> values;
    for (const auto& [author, s] : split) {
        for (const auto* side : {&s.pre, &s.post}) {
            for (const auto& d : *side) {
                const auto f = feats.find(d.doc_id);
                if (f == feats.end()) throw DataError(fmt::format("document {} has no feature record", d.doc_id));
                const auto g = join.delta_ppl.find(d.doc_id);
                values[d.doc_id] =
                    feature_values(f->second, g != join.delta_ppl.end() ? std::optional(g->second) : std::nullopt);
            }
        }
    }
    const auto raw = compute_raw_deltas(split, values);
    if (raw.empty()) throw DataError("no author has enough documents on both sides of the boundary");
    const auto standardized = winsorize_and_standardize(raw, cfg.standardize);
    for (const auto& w : standardized.report.warnings) spdlog::warn("standardize: {}", w);
    if (standardized.rows.empty()) throw DataError("no author has a complete change vector");
    spdlog::info("deltas: {} eligible authors, {} complete", raw.size(), standardized.rows.size());

    json report = standardized.report.to_json();
    report["eligible_authors"] = raw.size();
    report["ai_likeness_degenerate_authors"] = ai.degenerate_authors;
    st.write(kAiLikeness, ai_csv);
    st.write_via("deltas/author_deltas_raw.csv", [&](const fs::path& p) { write_author_deltas_csv(p, raw); });
    st.write_via(kDeltas, [&](const fs::path& p) { write_author_deltas_csv(p, standardized.rows); });
    st.write_json("deltas/standardization.json", report);
}

void stage_changepoint(const RunConfig& cfg, Stage& st) {
    const auto docs = load_docs(st.artifact(kCorpus, "ingest"));
    const auto feats = features_by_doc(st.artifact(kFeatures, "features"));
    const auto ai = read_ai_likeness(st.artifact(kAiLikeness, "deltas"));

    // series name -> (timestamp, value) points
    std::map<std::string, std::vector<std::pair<UnixSeconds, double>>> points;
    for (const auto& d : docs) {
        for (const auto& [name, v] : doc_variables(d, feats, ai))
            if (v) points[to_string(d.genre) + "/" + name].emplace_back(d.timestamp, *v);
    }

    std::string csv = "series,bucket,count,mean\n";
    json series = json::array();
    for (const auto& [name, pts] : points) {
        const auto buckets = bucket_series(pts, cfg.granularity);
        for (const auto& b : buckets.buckets) csv += fmt::format("{},{},{},{}\n", name, b.label, b.count, cell(b.mean));
        const auto ts = TimeSeries::from_buckets(buckets);
        const auto br = pelt(ts, cfg.pelt);
        for (const auto& w : br.warnings) spdlog::warn("changepoint {}: {}", name, w);
        json entry = br.to_json(ts);
        entry["series"] = name;
        entry["n"] = ts.n();
        series.push_back(entry);
    }
    st.write(kSeries, csv);
    st.write_json(kBreaks, {{"granularity", granularity_name(cfg.granularity)},
                            {"penalty_coeff", cfg.pelt.penalty_coeff},
                            {"min_size", cfg.pelt.min_size},
                            {"jump", cfg.pelt.jump},
                            {"series", series}});
}

StandardizedDeltas deltas_from_rows(std::vector<AuthorDelta> rows) {
    StandardizedDeltas sd;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        sd.report.features[f].name = std::string(delta_column_name(static_cast<Feature>(f)));
        sd.report.features[f].dropped =
            rows.empty() || std::any_of(rows.begin(), rows.end(), [f](const AuthorDelta& a) { return !a.d[f]; });
    }
    sd.rows = std::move(rows);
    return sd;
}

void stage_cluster(const RunConfig& cfg, Stage& st) {
    const auto sd = deltas_from_rows(read_author_deltas_csv(st.artifact(kDeltas, "deltas")));
    const auto input = clustering_matrix(sd, cfg.cluster_include_theme);
    if (input.points.cols() == 0) throw DataError("no usable change-vector columns to cluster");

    ClusterResult cr;
    try {
        cr = hdbscan(input.points, cfg.hdbscan);
    } catch (const InputError& e) {
        throw DataError(fmt::format("clustering failed: {}", e.what()));
    }

    const auto k = cr.cluster_count();
    std::vector<MapCentroid> map(k);
    std::vector<double> counts(k, 0.0);
    for (std::size_t i = 0; i < sd.rows.size(); ++i) {
        if (cr.labels[i] < 0) continue;
        const auto l = static_cast<std::size_t>(cr.labels[i]);
        map[l].style += sd.rows[i].d[idx(Feature::ppl)].value_or(0.0);
        map[l].theme += sd.rows[i].d[idx(Feature::ai_topic_share)].value_or(0.0);
        counts[l] += 1.0;
    }
    for (std::size_t l = 0; l < k; ++l) {
        map[l].style /= counts[l];
        map[l].theme /= counts[l];
    }
    const auto names = name_archetypes(map, cfg.naming);
    const auto centroids = cluster_centroids(input.points, cr.labels);
    const auto sil = silhouette_inliers(input.points, cr.labels);
    const auto db = davies_bouldin(input.points, cr.labels);

    std::string csv = "author_id,label,archetype,strength\n";
    for (std::size_t i = 0; i < sd.rows.size(); ++i) {
        const int l = cr.labels[i];
        csv += fmt::format("{},{},{},{}\n", csv_escape(input.author_ids[i]), l,
                           l < 0 ? "noise" : to_string(names[static_cast<std::size_t>(l)]),
                           format_double(cr.membership_strength[i]));
    }

    json clusters = json::array();
    for (std::size_t l = 0; l < k; ++l) {
        json c = json::object();
        for (std::size_t j = 0; j < input.columns.size(); ++j)
            c[input.columns[j]] = centroids[l](static_cast<Eigen::Index>(j));
        clusters.push_back({{"label", l},
                            {"size", cr.sizes[l]},
                            {"stability", cr.stabilities[l]},
                            {"archetype", to_string(names[l])},
                            {"style_centroid", map[l].style},
                            {"theme_centroid", map[l].theme},
                            {"centroid", c}});
    }
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };

    BootstrapConfig bcfg = cfg.bootstrap;
    bcfg.seed = cfg.seeds.robustness;
    bcfg.jobs = cfg.jobs;
    const auto stability = bootstrap_stability(input.points, cr.labels, cfg.hdbscan, bcfg);
    spdlog::info("cluster: {} clusters, {} noise of {} authors", k, cr.noise_count(), sd.rows.size());

    st.write(kAssignments, csv);
    st.write_json("cluster/clusters.json", {{"columns", input.columns},
                                            {"n_authors", sd.rows.size()},
                                            {"n_clusters", k},
                                            {"n_noise", cr.noise_count()},
                                            {"silhouette_inliers", opt(sil)},
                                            {"davies_bouldin", opt(db)},
                                            {"min_cluster_size", cfg.hdbscan.min_cluster_size},
                                            {"min_samples", cfg.hdbscan.min_samples},
                                            {"alpha", cfg.hdbscan.alpha},
                                            {"clusters", clusters}});
    st.write_json("cluster/stability.json", stability.to_json());
}

void stage_stats(const RunConfig& cfg, Stage& st) {
    const auto docs = load_docs(st.artifact(kCorpus, "ingest"));
    const auto feats = features_by_doc(st.artifact(kFeatures, "features"));
    const auto ai = read_ai_likeness(st.artifact(kAiLikeness, "deltas"));
    const auto split = split_by_boundary(docs, cfg.boundary);

    std::vector<std::string> names;
    std::map<std::string, std::vector<PanelRow>> panels;
    // Rows for the partial correlation: ai_likeness, post, fkgl, ttr, sentence length.
    std::vector<std::array<double, 5>> pc_rows;
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_category;
    for (const auto& [author, s] : split) {
        for (int post = 0; post < 2; ++post) {
            for (const auto& d : post ? s.post : s.pre) {
                const auto vars = doc_variables(d, feats, ai);
                const auto f = feats.find(d.doc_id);
                const double len = f != feats.end() ? static_cast<double>(f->second.word_count) : 0.0;
                std::map<std::string, std::optional<double>> vm;
                for (const auto& [name, v] : vars) {
                    vm[name] = v;
                    if (panels.find(name) == panels.end()) names.push_back(name);
                    auto& rows = panels[name];
                    if (v) rows.push_back({d.author_id, d.category, post, len, *v});
                }
                if (vm["ai_likeness"] && vm["fkgl"] && vm["ttr"] && vm["mean_sent_len"])
                    pc_rows.push_back({*vm["ai_likeness"], static_cast<double>(post), *vm["fkgl"], *vm["ttr"],
                                       *vm["mean_sent_len"]});
                if (vm["ai_likeness"]) {
                    auto& [pre_v, post_v] = by_category[d.category];
                    (post ? post_v : pre_v).push_back(*vm["ai_likeness"]);
                }
            }
        }
    }

    struct Fit {
        std::string name;
        std::optional<RegressionResult> res;
        std::string error;
    };
    std::vector<Fit> fits;
    std::vector<double> pvals;
    for (const auto& name : names) {
        Fit fit{name, std::nullopt, ""};
        try {
            fit.res = fe_regress(panels[name]);
            if (std::isnan(fit.res->p_beta)) {
                fit.error = "p-value undefined";
                fit.res.reset();
            } else {
                pvals.push_back(fit.res->p_beta);
            }
        } catch (const DataError& e) {
            fit.error = e.what();
        } catch (const InputError& e) {
            fit.error = e.what();
        }
        if (!fit.error.empty()) spdlog::warn("stats {}: {}", name, fit.error);
        fits.push_back(std::move(fit));
    }
    const auto holm = holm_bonferroni(pvals, 0.05);

    std::string csv = "feature,beta,gamma,se_hc3,t,p_raw,p_holm,reject,n_obs,n_authors,df,r2_within\n";
    std::size_t pi = 0;
    json errors = json::object();
    for (const auto& f : fits) {
        if (!f.res) {
            csv += fmt::format("{},,,,,,,,,,,\n", f.name);
            errors[f.name] = f.error;
            continue;
        }
        const auto& r = *f.res;
        csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", f.name, format_double(r.beta), format_double(r.gamma),
                           format_double(r.se_beta_hc3), format_double(r.t_beta), format_double(r.p_beta),
                           format_double(holm.adjusted[pi]), holm.reject[pi] ? "true" : "false", r.n_obs, r.n_authors,
                           r.df, format_double(r.r2_within));
        ++pi;
    }

    json partial = nullptr;
    if (pc_rows.size() >= 6) {
        const auto n = static_cast<Eigen::Index>(pc_rows.size());
        Eigen::VectorXd x(n), y(n);
        Eigen::MatrixXd z(n, 3);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& r = pc_rows[static_cast<std::size_t>(i)];
            x(i) = r[0];
            y(i) = r[1];
            z.row(i) << r[2], r[3], r[4];
        }
        if (const auto pc = partial_correlation(x, y, z))
            partial = {{"x", "ai_likeness"}, {"y", "post_llm"}, {"controls", {"fkgl", "ttr", "mean_sent_len"}},
                       {"n", pc_rows.size()}, {"r", pc->r}, {"p", pc->p}};
    }
    json effects = json::object();
    for (const auto& [cat, groups] : by_category) {
        const auto d = cohens_d(groups.second, groups.first);
        effects[cat] = {{"n_pre", groups.first.size()}, {"n_post", groups.second.size()},
                        {"cohens_d_post_vs_pre", d ? json(*d) : json(nullptr)}};
    }

    st.write("stats/regression.csv", csv);
    st.write_json("stats/summary.json", {{"alpha", 0.05},
                                         {"partial_correlation", partial},
                                         {"ai_likeness_effect_sizes", effects},
                                         {"unfitted", errors}});
}

void stage_report(const RunConfig& /*cfg*/, Stage& st) {
    const auto assignments = read_csv(st.artifact(kAssignments, "cluster"));
    const auto deltas = read_author_deltas_csv(st.artifact(kDeltas, "deltas"));
    const auto series = read_csv(st.artifact(kSeries, "changepoint"));
    json breaks;
    try {
        breaks = json::parse(read_file(st.artifact(kBreaks, "changepoint")));
    } catch (const json::exception& e) {
        throw DataError(fmt::format("{}: {}", kBreaks, e.what()));
    }

    std::map<std::string, const AuthorDelta*> by_author;
    for (const auto& d : deltas) by_author[d.author_id] = &d;

    // Archetype map: one point per author on the style/theme plane.
    const auto c_id = assignments.column("author_id"), c_l = assignments.column("label"),
               c_a = assignments.column("archetype");
    std::string map_csv = "author_id,style_d_ppl,theme_d_ai_topic_share,label,archetype\n";
    struct Group {
        int label = -1;
        std::size_t n = 0;
        std::array<double, kFeatureCount> sum{};
        std::array<std::size_t, kFeatureCount> cnt{};
    };
    std::map<std::string, Group> groups;
    for (const auto& row : assignments.rows) {
        const auto it = by_author.find(row.at(c_id));
        if (it == by_author.end()) throw DataError(fmt::format("author {} missing from {}", row.at(c_id), kDeltas));
        const auto& d = it->second->d;
        map_csv += fmt::format("{},{},{},{},{}\n", csv_escape(row.at(c_id)), cell(d[idx(Feature::ppl)]),
                               cell(d[idx(Feature::ai_topic_share)]), row.at(c_l), row.at(c_a));
        const std::string key = row.at(c_l) == "-1" ? "noise" : row.at(c_a) + "#" + row.at(c_l);
        auto& g = groups[key];
        g.label = std::stoi(row.at(c_l));
        ++g.n;
        for (std::size_t f = 0; f < kFeatureCount; ++f)
            if (d[f]) {
                g.sum[f] += *d[f];
                ++g.cnt[f];
            }
    }
    std::string prof_csv = "archetype,label,n,share";
    for (std::size_t f = 0; f < kFeatureCount; ++f) prof_csv += fmt::format(",{}", delta_column_name(static_cast<Feature>(f)));
    prof_csv += '\n';
    const auto total = static_cast<double>(assignments.rows.size());
    for (const auto& [key, g] : groups) {
        prof_csv += fmt::format("{},{},{},{}", key.substr(0, key.find('#')), g.label, g.n,
                                format_double(static_cast<double>(g.n) / total));
        for (std::size_t f = 0; f < kFeatureCount; ++f)
            prof_csv += "," + cell(g.cnt[f] ? std::optional(g.sum[f] / static_cast<double>(g.cnt[f])) : std::nullopt);
        prof_csv += '\n';
    }

    // Time series with PELT segments; segment indices count non-empty buckets.
    std::map<std::string, json> seg_of;
    for (const auto& s : breaks.at("series")) seg_of[s.at("series").get<std::string>()] = s;
    const auto c_s = series.column("series"), c_b = series.column("bucket"), c_n = series.column("count"),
               c_m = series.column("mean");
    std::string ts_csv = "series,bucket,count,mean,segment,segment_mean,is_break\n";
    std::map<std::string, std::size_t> position;
    for (const auto& row : series.rows) {
        const std::string& name = row.at(c_s);
        std::string segment, seg_mean, is_break = "false";
        if (!row.at(c_m).empty() && seg_of.count(name)) {
            const std::size_t pos = position[name]++;
            const auto& s = seg_of[name];
            std::size_t seg = 0;
            for (const auto& b : s.at("breakpoints")) {
                if (b.get<std::size_t>() <= pos) ++seg;
                if (b.get<std::size_t>() == pos) is_break = "true";
            }
            segment = std::to_string(seg);
            if (seg < s.at("segments").size()) seg_mean = format_double(s.at("segments")[seg].at("mean").get<double>());
        }
        ts_csv += fmt::format("{},{},{},{},{},{},{}\n", name, row.at(c_b), row.at(c_n), row.at(c_m), segment, seg_mean,
                              is_break);
    }

    st.write("report/archetype_map.csv", map_csv);
    st.write("report/archetype_profiles.csv", prof_csv);
    st.write("report/timeseries.csv", ts_csv);
}

void stage_synth(const RunConfig& cfg, Stage& st) {
    auto spec = DocCorpusSpec::three_archetypes(cfg.synth.per_archetype, cfg.synth.noise_authors);
    spec.docs_per_author_per_period = cfg.synth.docs_per_author_per_period;
    spec.seed = cfg.seeds.validation;
    spec.judge_model_id = cfg.inputs.judge_model_id;
    spec.current_model_id = cfg.inputs.current_model_id;
    const auto corpus = gen_document_corpus(spec);
    spdlog::info("synth: {} documents from {} authors", corpus.docs.size(), corpus.truth.size());
    st.write_via("synth/corpus.jsonl", [&](const fs::path& p) { write_corpus(p, corpus.docs); });
    st.write_via("synth/logprobs.jsonl", [&](const fs::path& p) { write_logprobs(p, corpus.logprobs); });
    st.write_via("synth/truth.csv", [&](const fs::path& p) { write_truth_csv(p, corpus.truth); });
}

using StageFn = void (*)(const RunConfig&, Stage&);

const std::vector<std::pair<std::string, StageFn>>& stages() {
    static const std::vector<std::pair<std::string, StageFn>> s = {
        {"ingest", stage_ingest},   {"features", stage_features}, {"deltas", stage_deltas},
        {"changepoint", stage_changepoint}, {"cluster", stage_cluster}, {"stats", stage_stats},
        {"report", stage_report},   {"synth", stage_synth},
    };
    return s;
}

} // namespace

void run_command(const std::string& command, const RunConfig& cfg, const fs::path& run_dir) {
    const auto& cmds = pipeline_commands();
    if (std::find(cmds.begin(), cmds.end(), command) == cmds.end())
        throw ConfigError(fmt::format("unknown command '{}'", command));
    cfg.validate();

    const std::string config_text = cfg.to_json().dump(2) + "\n";
    const std::string config_hash = hex64(fnv1a64(config_text));
    fs::create_directories(run_dir);
    const fs::path config_path = run_dir / "config.json";
    if (fs::exists(config_path)) {
        if (read_file(config_path) != config_text)
            throw ConfigError(fmt::format("{} was written by a run with a different configuration; use a fresh --out",
                                          config_path.string()));
    } else {
        write_file(config_path, config_text);
    }

    for (const auto& [name, fn] : stages()) {
        if (command == name || (command == "all" && name != "synth")) {
            spdlog::info("{}: starting", name);
            Stage st(name, run_dir, config_hash);
            fn(cfg, st);
            st.finish();
        }
    }
}

} // namespace stylo
