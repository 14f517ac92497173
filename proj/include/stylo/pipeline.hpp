#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stylo/archetypes.hpp"
#include "stylo/changepoint.hpp"
#include "stylo/corpus.hpp"
#include "stylo/delta.hpp"

namespace stylo {

struct Seeds {
    std::uint64_t main = 42;
    std::uint64_t robustness = 1337;
    std::uint64_t validation = 2024;
};

struct RunConfig {
    struct Inputs {
        std::string corpus;
        std::string logprobs;
        std::string bot_list;
        std::string judge_model_id = "synth-judge";
        std::string current_model_id = "synth-current";
    } inputs;

    FilterConfig filter;
    BoundaryConfig boundary;

    struct Sampling {
        bool enabled = false;
        bool per_period = true;
        QuotaConfig quotas = QuotaConfig::paper_defaults();
    } sampling;

    std::string lexicon_path; ///< empty: built-in default lexicon
    std::optional<double> lexicon_threshold;
    Granularity granularity = Granularity::monthly;
    PeltConfig pelt;
    StandardizeConfig standardize;
    HdbscanConfig hdbscan;
    bool cluster_include_theme = true;
    BootstrapConfig bootstrap;
    NamingConfig naming;
    Seeds seeds;

    struct Synth {
        std::size_t per_archetype = 100;
        std::size_t noise_authors = 60;
        std::size_t docs_per_author_per_period = 25;
    } synth;

    int jobs = 1; ///< not part of the recorded config: it never changes outputs

    /// Missing keys take defaults; unknown keys and invalid values raise ConfigError.
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
    void validate() const;
};

inline const std::vector<std::string>& pipeline_commands() {
    static const std::vector<std::string> cmds = {"ingest", "features", "deltas", "changepoint",
                                                  "cluster", "stats", "report", "synth", "all"};
    return cmds;
}

/// Runs one command against the run directory. `all` runs ingest through
/// report in order. Each executed stage appends one line to manifest.jsonl.
/// Throws DataError, ConfigError or DependencyError.
void run_command(const std::string& command, const RunConfig& cfg, const std::filesystem::path& run_dir);

/// Exit code contract: 0 success, 1 data error, 2 dependency or config error.
int exit_code_for(const std::exception& e);

} // namespace stylo
