#include "stylo/ai_likeness.hpp"

#include <cmath>
#include <fstream>
#include <utility>

#include <fmt/format.h>

#include "stylo/common.hpp"

namespace stylo {

nlohmann::json LogProbRecord::to_json() const {
    nlohmann::json j = {{"doc_id", doc_id},
                        {"model_id", model_id},
                        {"total_nll_nats", total_nll_nats},
                        {"char_count", char_count}};
    if (truncated) j["truncated"] = true;
    return j;
}

LogProbRecord LogProbRecord::from_json(const nlohmann::json& j) {
    LogProbRecord r;
    r.doc_id = j.at("doc_id").get<std::string>();
    r.model_id = j.at("model_id").get<std::string>();
    r.total_nll_nats = j.at("total_nll_nats").get<double>();
    const auto cc = j.at("char_count").get<std::int64_t>();
    if (cc <= 0) throw DataError(fmt::format("doc {}: char_count must be > 0", r.doc_id));
    r.char_count = static_cast<std::size_t>(cc);
    if (!std::isfinite(r.total_nll_nats) || r.total_nll_nats < 0.0)
        throw DataError(fmt::format("doc {}: total_nll_nats must be finite and >= 0", r.doc_id));
    if (auto it = j.find("truncated"); it != j.end() && it->is_boolean()) r.truncated = it->get<bool>();
    return r;
}

std::vector<LogProbRecord> load_logprobs(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError(fmt::format("cannot read log-prob file {}", path.string()));
    std::vector<LogProbRecord> out;
    std::set<std::pair<std::string, std::string>> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto r = LogProbRecord::from_json(nlohmann::json::parse(line));
            if (!seen.emplace(r.doc_id, r.model_id).second)
                throw DataError(fmt::format("duplicate record for ({}, {})", r.doc_id, r.model_id));
            out.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw DataError(fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
        } catch (const DataError& e) {
            throw DataError(fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
        }
    }
    return out;
}

void write_logprobs(const std::filesystem::path& path, const std::vector<LogProbRecord>& records) {
    std::ofstream out(path);
    if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
    for (const auto& r : records) out << r.to_json().dump() << '\n';
}

double perplexity_gap(const LogProbRecord& judge, const LogProbRecord& current) {
    if (judge.doc_id != current.doc_id)
        throw DataError(fmt::format("log-prob records refer to different documents: {} vs {}", judge.doc_id,
                                    current.doc_id));
    if (judge.char_count != current.char_count || judge.char_count == 0)
        throw DataError(fmt::format("doc {}: char_count mismatch between scorer records ({} vs {})", judge.doc_id,
                                    judge.char_count, current.char_count));
    const double chars = static_cast<double>(judge.char_count);
    return judge.total_nll_nats / chars - current.total_nll_nats / chars;
}

AiLikenessResult ai_likeness_index(const std::map<std::string, std::vector<GapEntry>>& gaps) {
    AiLikenessResult out;
    for (const auto& [author, entries] : gaps) {
        if (entries.size() < 2) {
            out.warnings.push_back(fmt::format("author {} excluded: {} gap document(s), need at least 2", author,
                                               entries.size()));
            continue;
        }
        std::vector<double> xs;
        xs.reserve(entries.size());
        for (const auto& e : entries) xs.push_back(e.delta_ppl);
        const double mu = *mean_of(xs);
        const double sd = *sample_sd(xs);
        const bool degenerate = sd < 1e-12;
        if (degenerate) out.degenerate_authors.insert(author);
        for (const auto& e : entries) out.index[e.doc_id] = degenerate ? 0.0 : (e.delta_ppl - mu) / sd;
    }
    return out;
}

GapJoin join_gaps(const std::vector<Document>& docs, const std::vector<LogProbRecord>& records,
                  const std::string& judge_model_id, const std::string& current_model_id) {
    std::map<std::string, const LogProbRecord*> judge, current;
    for (const auto& r : records) {
        if (r.model_id == judge_model_id) judge[r.doc_id] = &r;
        if (r.model_id == current_model_id) current[r.doc_id] = &r;
    }
    GapJoin out;
    std::size_t missing = 0;
    for (const auto& d : docs) {
        const auto j = judge.find(d.doc_id);
        const auto c = current.find(d.doc_id);
        if (j == judge.end() || c == current.end()) {
            ++missing;
            continue;
        }
        if (j->second->char_count != d.char_count || c->second->char_count != d.char_count)
            throw DataError(fmt::format("doc {}: scorer char_count does not match the corpus ({} chars)", d.doc_id,
                                        d.char_count));
        out.delta_ppl[d.doc_id] = perplexity_gap(*j->second, *c->second);
    }
    if (missing > 0)
        out.warnings.push_back(fmt::format("{} document(s) lack a judge or current log-prob record", missing));
    return out;
}

} // namespace stylo
