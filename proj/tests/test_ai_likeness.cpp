#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "stylo/ai_likeness.hpp"
#include "stylo/common.hpp"
#include "stylo/io.hpp"
#include "stylo/rng.hpp"

using namespace stylo;

namespace {

LogProbRecord rec(const std::string& doc, const std::string& model, double nll, std::size_t chars) {
    LogProbRecord r;
    r.doc_id = doc;
    r.model_id = model;
    r.total_nll_nats = nll;
    r.char_count = chars;
    return r;
}

std::vector<GapEntry> gaps_of(const std::vector<double>& xs) {
    std::vector<GapEntry> out;
    for (std::size_t i = 0; i < xs.size(); ++i)
        out.push_back({"d" + std::to_string(i), xs[i], i % 2 == 0 ? Period::pre : Period::post});
    return out;
}

} // namespace

TEST_CASE("perplexity gap arithmetic") {
    CHECK(perplexity_gap(rec("d", "j", 200, 100), rec("d", "c", 200, 100)) == 0.0);
    CHECK(perplexity_gap(rec("d", "j", 300, 100), rec("d", "c", 200, 100)) == doctest::Approx(1.0));
    CHECK(perplexity_gap(rec("d", "j", 150, 100), rec("d", "c", 200, 100)) == doctest::Approx(-0.5));

    try {
        perplexity_gap(rec("doc-7", "j", 1, 100), rec("doc-7", "c", 1, 99));
        FAIL("expected a data error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("doc-7") != std::string::npos);
    }
}

TEST_CASE("within-author z-scores") {
    const auto r = ai_likeness_index({{"a", gaps_of({1.0, 3.0})}});
    CHECK(r.index.at("d0") == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(r.index.at("d1") == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(std::abs(r.index.at("d1") - 0.707) < 1e-3);

    const auto flat = ai_likeness_index({{"b", gaps_of({2, 2, 2})}});
    for (const auto& [doc, z] : flat.index) CHECK(z == 0.0);
    CHECK(flat.degenerate_authors.count("b") == 1);

    const auto thin = ai_likeness_index({{"c", gaps_of({5.0})}});
    CHECK(thin.index.empty());
    CHECK(thin.warnings.size() == 1);
}

TEST_CASE("z-scores have mean 0 and SD 1 and ignore affine rescaling") {
    Rng rng(17);
    std::map<std::string, std::vector<GapEntry>> gaps;
    for (int a = 0; a < 30; ++a) {
        std::vector<double> xs;
        const auto n = 2 + rng.index(40);
        for (std::size_t i = 0; i < n; ++i) xs.push_back(rng.normal(0.3 * a, 1.0 + a));
        auto g = gaps_of(xs);
        for (auto& e : g) e.doc_id = "a" + std::to_string(a) + "_" + e.doc_id;
        gaps["a" + std::to_string(a)] = g;
    }
    const auto r = ai_likeness_index(gaps);
    for (const auto& [author, g] : gaps) {
        std::vector<double> z;
        for (const auto& e : g) z.push_back(r.index.at(e.doc_id));
        CHECK(std::abs(*mean_of(z)) < 1e-9);
        CHECK(std::abs(*sample_sd(z) - 1.0) < 1e-9);
    }

    auto scaled = gaps;
    for (auto& e : scaled["a3"]) e.delta_ppl = 2.5 * e.delta_ppl - 7.0;
    const auto r2 = ai_likeness_index(scaled);
    for (const auto& e : gaps["a3"]) CHECK(r2.index.at(e.doc_id) == doctest::Approx(r.index.at(e.doc_id)).epsilon(1e-9));
}

TEST_CASE("log-prob JSONL schema") {
    const auto dir = std::filesystem::temp_directory_path() / "stylo_test_logprobs";
    std::filesystem::create_directories(dir);

    std::vector<LogProbRecord> recs = {rec("d1", "judge", 210.5, 100), rec("d1", "current", 200.0, 100)};
    recs[1].truncated = true;
    write_logprobs(dir / "lp.jsonl", recs);
    const auto back = load_logprobs(dir / "lp.jsonl");
    REQUIRE(back.size() == 2);
    CHECK(back[0].doc_id == "d1");
    CHECK(back[0].model_id == "judge");
    CHECK(back[0].total_nll_nats == 210.5);
    CHECK(back[0].char_count == 100);
    CHECK(back[1].truncated);

    const auto text = read_file(dir / "lp.jsonl");
    const auto j = nlohmann::json::parse(text.substr(0, text.find('\n')));
    for (const char* key : {"doc_id", "model_id", "total_nll_nats", "char_count"}) CHECK(j.contains(key));
    CHECK_FALSE(j.contains("truncated")); // optional, written only when set

    write_file(dir / "dup.jsonl", read_file(dir / "lp.jsonl") + j.dump() + "\n");
    CHECK_THROWS_AS(load_logprobs(dir / "dup.jsonl"), DataError);
    write_file(dir / "neg.jsonl",
               R"({"doc_id":"x","model_id":"m","total_nll_nats":-1,"char_count":3,"truncated":false})"
               "\n");
    CHECK_THROWS_AS(load_logprobs(dir / "neg.jsonl"), DataError);
    write_file(dir / "zero.jsonl",
               R"({"doc_id":"x","model_id":"m","total_nll_nats":1,"char_count":0,"truncated":false})"
               "\n");
    CHECK_THROWS_AS(load_logprobs(dir / "zero.jsonl"), DataError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("joining gaps against the corpus") {
    const auto d1 = make_document("d1", "a", 0, Genre::social, "Other", std::string(100, 'x'));
    const auto d2 = make_document("d2", "a", 0, Genre::social, "Other", std::string(50, 'y'));
    const std::vector<LogProbRecord> recs = {rec("d1", "j", 300, 100), rec("d1", "c", 200, 100),
                                             rec("d2", "j", 10, 50)};
    const auto g = join_gaps({d1, d2}, recs, "j", "c");
    CHECK(g.delta_ppl.size() == 1);
    CHECK(g.delta_ppl.at("d1") == doctest::Approx(1.0));
    CHECK(g.warnings.size() == 1);

    const std::vector<LogProbRecord> bad = {rec("d1", "j", 300, 99), rec("d1", "c", 200, 99)};
    CHECK_THROWS_AS(join_gaps({d1}, bad, "j", "c"), DataError);

    // Same model on both sides gives zero gaps.
    const std::vector<LogProbRecord> same = {rec("d1", "m", 123.4, 100), rec("d2", "m", 55.5, 50)};
    for (const auto& [doc, gap] : join_gaps({d1, d2}, same, "m", "m").delta_ppl) CHECK(gap == 0.0);
}
