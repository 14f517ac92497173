#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stylo/corpus.hpp"

namespace stylo {

/// Total negative log-likelihood of a document under one scorer model.
struct LogProbRecord {
    std::string doc_id;
    std::string model_id;
    double total_nll_nats = 0.0;
    std::size_t char_count = 0;
    bool truncated = false;

    nlohmann::json to_json() const;
    static LogProbRecord from_json(const nlohmann::json& j);
};

/// Reads LogProbRecord JSONL. Duplicate (doc_id, model_id) pairs and invalid
/// values raise DataError naming the line.
std::vector<LogProbRecord> load_logprobs(const std::filesystem::path& path);
void write_logprobs(const std::filesystem::path& path, const std::vector<LogProbRecord>& records);

/// judge nll/char minus current nll/char, in nats per character.
/// Positive values mean the text is easier for the current model.
double perplexity_gap(const LogProbRecord& judge, const LogProbRecord& current);

enum class Period { pre, post };

struct GapEntry {
    std::string doc_id;
    double delta_ppl = 0.0;
    Period period = Period::pre;
};

struct AiLikenessResult {
    std::map<std::string, double> index; ///< doc_id -> within-author z-score
    std::set<std::string> degenerate_authors;
    std::vector<std::string> warnings;
};

/// Pooled pre+post z-score of the gap per author, sample SD (n-1).
/// Authors with fewer than two gaps are excluded with a warning; authors
/// whose SD is below 1e-12 get all-zero indices and are flagged.
AiLikenessResult ai_likeness_index(const std::map<std::string, std::vector<GapEntry>>& gaps);

struct GapJoin {
    std::map<std::string, double> delta_ppl; ///< doc_id -> gap
    std::vector<std::string> warnings;
};

/// Pairs judge and current records per document and checks char_count
/// against the corpus. Documents lacking either record are skipped with a warning.
GapJoin join_gaps(const std::vector<Document>& docs, const std::vector<LogProbRecord>& records,
                  const std::string& judge_model_id, const std::string& current_model_id);

} // namespace stylo
