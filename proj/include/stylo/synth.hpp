#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stylo/ai_likeness.hpp"
#include "stylo/corpus.hpp"
#include "stylo/delta.hpp"

namespace stylo {

struct ArchetypeSpec {
    std::string name;
    std::size_t count = 0;
    std::array<double, kStyleFeatureCount> style_delta_mean{};
    double theme_delta_mean = 0.0;
    double cov_scale = 0.15;
};

struct DeltaPopulation {
    /// One row per point: the seven style components, then the theme component.
    Eigen::MatrixXd points;
    /// Index into the spec list; -1 for uniform noise points.
    std::vector<int> labels;
};

/// Isotropic Gaussian clouds per spec plus `noise_count` points uniform in the
/// clouds' bounding box inflated 1.5x about its centre. Throws InputError when
/// fewer than 50 points are requested in total.
DeltaPopulation gen_delta_population(const std::vector<ArchetypeSpec>& specs, std::size_t noise_count,
                                     std::uint64_t seed);

/// Pre-to-post shift of each generator knob, in units of that knob's
/// per-document spread. Index order follows Feature.
struct DriftProfile {
    std::string name;
    std::size_t authors = 0;
    std::array<double, kFeatureCount> shift{};
};

struct DocCorpusSpec {
    std::vector<DriftProfile> profiles;
    std::size_t noise_authors = 0;
    /// Noise authors draw each shift uniformly from [-range, range].
    double noise_shift_range = 3.0;
    std::size_t docs_per_author_per_period = 25;
    std::uint64_t seed = 42;
    std::string judge_model_id = "synth-judge";
    std::string current_model_id = "synth-current";

    /// Adopter, Resistor and Pragmatist profiles with `per_archetype` authors each.
    static DocCorpusSpec three_archetypes(std::size_t per_archetype, std::size_t noise_authors);
};

struct TruthRow {
    std::string author_id;
    std::string archetype; ///< profile name, or "noise"
    int label = -1;        ///< profile index, -1 for noise authors
};

struct SynthCorpus {
    std::vector<Document> docs;
    std::vector<LogProbRecord> logprobs;
    std::vector<TruthRow> truth;
};

/// Template-generated documents whose feature knobs shift between periods
/// according to each author's profile, plus judge/current records with the
/// planted perplexity-gap shift. Pure function of the spec.
SynthCorpus gen_document_corpus(const DocCorpusSpec& spec);

void write_truth_csv(const std::filesystem::path& path, const std::vector<TruthRow>& truth);
std::vector<TruthRow> read_truth_csv(const std::filesystem::path& path);

} // namespace stylo
