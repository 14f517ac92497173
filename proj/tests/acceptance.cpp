// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "oracles.hpp"
#include "stylo/ai_likeness.hpp"
#include "stylo/archetypes.hpp"
#include "stylo/changepoint.hpp"
#include "stylo/common.hpp"
#include "stylo/delta.hpp"
#include "stylo/io.hpp"
#include "stylo/pipeline.hpp"
#include "stylo/rng.hpp"
#include "stylo/stats.hpp"
#include "stylo/stylometry.hpp"
#include "stylo/synth.hpp"

using namespace stylo;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

TimeSeries make_series(const std::vector<double>& v) {
    TimeSeries s;
    for (std::size_t i = 0; i < v.size(); ++i) s.bucket_labels.push_back(fmt::format("b{:03}", i));
    s.values = v;
    return s;
}

struct Blobs {
    Eigen::MatrixXd points;
    std::vector<int> truth;
};

// Three 8-D isotropic clouds, sigma 0.1, centres 5 units along distinct axes.
Blobs planted_blobs(std::uint64_t seed) {
    Rng rng(seed);
    Blobs b;
    b.points.resize(180, 8);
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 60; ++i) {
            const Eigen::Index r = c * 60 + i;
            for (Eigen::Index d = 0; d < 8; ++d) b.points(r, d) = (d == c ? 5.0 : 0.0) + rng.normal(0.0, 0.1);
            b.truth.push_back(c);
        }
    return b;
}

Outcome pelt_exactness() {
    Outcome o;
    Rng rng(42);
    const PeltConfig cfg;  // penalty 4.2 ln n, min_size 1, jump 2
    double worst = 0.0;
    const auto t0 = std::chrono::steady_clock::now();
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = 2 + rng.index(15);
        std::vector<double> v;
        double level = rng.normal();
        for (std::size_t i = 0; i < n; ++i) {
            if (rng.bernoulli(0.25)) level += rng.normal(0.0, 3.0);
            v.push_back(level + rng.normal(0.0, 0.3 + rng.uniform()));
        }
        const auto s = make_series(v);
        const double p = pelt(s, cfg).total_cost;
        worst = std::max(worst, std::abs(p - brute_force_segmentation(s, cfg).total_cost));
        worst = std::max(worst, std::abs(p - oracle::best_segmentation(v, cfg.penalty_coeff, cfg.min_size, cfg.jump)));
    }
    const double secs = seconds_since(t0);
    o.require(worst <= 1e-9, fmt::format("max cost difference {:.3g}", worst));
    o.require(secs < 5.0, fmt::format("took {:.2f}s", secs));
    if (o.pass) o.detail = fmt::format("200 series, max |pelt - exhaustive| = {:.3g}, {:.2f}s", worst, secs);
    return o;
}

Outcome pelt_step() {
    Outcome o;
    PeltConfig cfg;
    cfg.min_size = 1;
    cfg.jump = 1;
    const auto r = pelt(make_series({0, 0, 0, 0, 0, 5, 5, 5, 5, 5}), cfg);
    o.require(std::abs(r.penalty - 4.2 * std::log(10.0)) < 1e-12, "penalty is not 4.2 ln 10");
    o.require(r.breakpoints == std::vector<std::size_t>{5}, fmt::format("breakpoints [{}]", fmt::join(r.breakpoints, ",")));
    for (std::size_t n : {2u, 7u, 10u, 33u}) {
        const auto c = pelt(make_series(std::vector<double>(n, 1.5)), cfg);
        o.require(c.breakpoints.empty(), fmt::format("constant series of length {} has breaks", n));
    }
    if (o.pass) o.detail = "step -> [5]; constant series -> []";
    return o;
}

Outcome hdbscan_blobs() {
    Outcome o;
    const auto b = planted_blobs(42);
    HdbscanConfig cfg;
    cfg.min_cluster_size = 15;
    cfg.min_samples = 5;
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = hdbscan(b.points, cfg);
    const double secs = seconds_since(t0);
    const double ari = adjusted_rand_index(r.labels, b.truth);
    const double noise = static_cast<double>(r.noise_count()) / 180.0;
    o.require(r.cluster_count() == 3, fmt::format("{} clusters", r.cluster_count()));
    o.require(ari >= 0.99, fmt::format("ARI {:.4f}", ari));
    o.require(noise <= 0.05, fmt::format("noise {:.3f}", noise));
    o.require(secs < 10.0, fmt::format("took {:.2f}s", secs));
    if (o.pass) o.detail = fmt::format("3 clusters, ARI {:.4f}, noise {:.3f}, {:.3f}s", ari, noise, secs);
    return o;
}

Outcome hdbscan_permutation() {
    Outcome o;
    Rng rng(7);
    Eigen::MatrixXd p(500, 6);
    for (Eigen::Index i = 0; i < 500; ++i) {
        const int c = static_cast<int>(i % 4);
        for (Eigen::Index d = 0; d < 6; ++d)
            p(i, d) = i < 460 ? (d == c ? 4.0 : 0.0) + rng.normal(0.0, 0.7) : rng.uniform(-2.0, 6.0);
    }
    const auto base = hdbscan(p, HdbscanConfig{});
    std::vector<std::size_t> perm(500);
    std::iota(perm.begin(), perm.end(), 0);
    double worst = 1.0;
    for (int round = 0; round < 5; ++round) {
        rng.shuffle(perm);
        Eigen::MatrixXd q(500, 6);
        for (std::size_t i = 0; i < 500; ++i) q.row(static_cast<Eigen::Index>(i)) = p.row(static_cast<Eigen::Index>(perm[i]));
        const auto r = hdbscan(q, HdbscanConfig{});
        std::vector<int> back(500);
        for (std::size_t i = 0; i < 500; ++i) back[perm[i]] = r.labels[i];
        worst = std::min(worst, adjusted_rand_index(base.labels, back));
    }
    o.require(worst == 1.0, fmt::format("min ARI {:.17g}", worst));
    if (o.pass) o.detail = fmt::format("5 permutations of 500 points ({} clusters), ARI = 1.0", base.cluster_count());
    return o;
}

Outcome validity_oracles() {
    Outcome o;
    Rng rng(99);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto n = 4 + rng.index(117);
        const auto dims = 1 + rng.index(5);
        const auto k = 2 + rng.index(4);
        Eigen::MatrixXd p(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dims));
        std::vector<int> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = rng.bernoulli(0.1) ? -1 : static_cast<int>(rng.index(k));
            b[i] = rng.bernoulli(0.5) ? a[i] : static_cast<int>(rng.index(k + 1)) - 1;
            for (std::size_t d = 0; d < dims; ++d)
                p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) =
                    rng.normal(a[i] >= 0 ? 3.0 * a[i] : 0.0, 1.0);
        }
        worst = std::max(worst, std::abs(adjusted_rand_index(a, b) - oracle::ari(a, b)));
        const auto s = silhouette_inliers(p, a), so = oracle::silhouette(p, a);
        const auto d = davies_bouldin(p, a), dor = oracle::davies_bouldin(p, a);
        if (s.has_value() != so.has_value() || d.has_value() != dor.has_value()) {
            o.require(false, fmt::format("dataset {}: defined/undefined mismatch", trial));
            continue;
        }
        if (s) worst = std::max(worst, std::abs(*s - *so));
        if (d) worst = std::max(worst, std::abs(*d - *dor));
    }
    const double hand = adjusted_rand_index({0, 0, 1, 1}, {0, 1, 0, 1});
    o.require(worst <= 1e-9, fmt::format("max deviation {:.3g}", worst));
    o.require(hand == -0.5, fmt::format("ARI hand case {:.17g}", hand));
    if (o.pass) o.detail = fmt::format("50 datasets, max deviation {:.3g}; ARI hand case = -0.5", worst);
    return o;
}

Outcome end_to_end(const fs::path& work) {
    Outcome o;
    fs::remove_all(work);
    const auto t0 = std::chrono::steady_clock::now();

    auto cfg = RunConfig::from_json(nlohmann::json::object());
    cfg.synth.per_archetype = 100;
    cfg.synth.noise_authors = 60;
    run_command("synth", cfg, work / "synth_run");

    nlohmann::json j = cfg.to_json();
    j["inputs"]["corpus"] = (work / "synth_run" / "synth" / "corpus.jsonl").string();
    j["inputs"]["logprobs"] = (work / "synth_run" / "synth" / "logprobs.jsonl").string();
    j["seeds"]["main"] = 42;
    run_command("all", RunConfig::from_json(j), work / "run");
    const double secs = seconds_since(t0);

    std::map<std::string, TruthRow> truth;
    for (auto& t : read_truth_csv(work / "synth_run" / "synth" / "truth.csv")) truth[t.author_id] = t;
    const auto table = read_csv(work / "run" / "cluster" / "assignments.csv");
    const auto c_id = table.column("author_id"), c_label = table.column("label"), c_name = table.column("archetype");

    std::vector<int> planted, found;
    std::map<std::string, std::map<std::string, int>> names_by_group;
    for (const auto& row : table.rows) {
        const auto& t = truth.at(row[c_id]);
        planted.push_back(t.label);
        found.push_back(std::stoi(row[c_label]));
        names_by_group[t.archetype][row[c_name]] += 1;
    }
    o.require(planted.size() == truth.size(),
              fmt::format("{} of {} authors clustered", planted.size(), truth.size()));
    const double ari = adjusted_rand_index(planted, found);
    o.require(ari >= 0.85, fmt::format("ARI {:.4f}", ari));
    std::string naming;
    for (const std::string group : {"Adopter", "Resistor", "Pragmatist"}) {
        const auto& counts = names_by_group[group];
        const auto top = std::max_element(counts.begin(), counts.end(),
                                           [](const auto& x, const auto& y) { return x.second < y.second; });
        const std::string got = top == counts.end() ? "none" : top->first;
        o.require(got == group, fmt::format("{} group named {}", group, got));
        naming += fmt::format(" {}->{}", group, got);
    }
    o.require(secs < 300.0, fmt::format("took {:.1f}s", secs));
    if (o.pass)
        o.detail = fmt::format("{} authors, ARI {:.4f},{}; {:.1f}s", planted.size(), ari, naming, secs);
    return o;
}

Outcome statistics_oracles() {
    Outcome o;
    Rng rng(42);
    const std::vector<std::string> cats = {"Gaming", "Other", "Social", "Tech"};
    std::vector<PanelRow> rows;
    for (int a = 0; a < 50; ++a) {
        const double effect = rng.normal(0.0, 3.0);
        for (int k = 0; k < 20; ++k) {
            PanelRow r;
            r.author_id = fmt::format("a{:02}", a);
            r.category = cats[rng.index(cats.size())];
            r.post_llm = k >= 10 ? 1 : 0;
            r.length = rng.uniform(5.0, 60.0);
            r.y = 2.0 * r.post_llm + 0.5 * r.length + effect + rng.normal(0.0, 0.01);
            rows.push_back(r);
        }
    }
    const auto fe = fe_regress(rows);
    o.require(fe.beta >= 1.9 && fe.beta <= 2.1, fmt::format("beta {:.4f}", fe.beta));

    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(3, 1);
    Eigen::VectorXd e(3);
    e << 1, -1, 0;
    const double se = hc3_se(X, e, 0);
    o.require(std::abs(se - 0.7071) <= 1e-4, fmt::format("HC3 SE {:.6f}", se));

    const auto holm = holm_bonferroni({0.01, 0.04, 0.03}, 0.05);
    o.require(holm.reject == std::vector<bool>{true, false, false}, "Holm rejections differ from [true,false,false]");
    if (o.pass) o.detail = fmt::format("beta {:.4f}, HC3 SE {:.6f}, Holm rejects only p=0.01", fe.beta, se);
    return o;
}

Outcome feature_formulas(const fs::path& work) {
    Outcome o;
    const std::string cat = "The cat sat.";
    const double g = *fkgl(tokenize(cat), split_sentences(cat));
    o.require(std::abs(g - (-2.62)) <= 0.01, fmt::format("FKGL {:.4f}", g));

    std::vector<std::string> distinct;
    for (int i = 0; i < 150; ++i) distinct.push_back(fmt::format("w{}", i));
    auto mixed = distinct;
    for (int i = 0; i < 75; ++i) mixed.push_back(distinct[75 + static_cast<std::size_t>(i)]);
    const double t1 = *windowed_ttr(distinct);
    const double t2 = *windowed_ttr(std::vector<std::string>(150, "same"));
    const double t3 = *windowed_ttr(mixed);
    o.require(t1 == 1.0 && t2 == 1.0 / 150.0 && t3 == 0.75, fmt::format("TTR {} {} {}", t1, t2, t3));

    Rng rng(3);
    std::map<std::string, std::vector<GapEntry>> gaps;
    for (int a = 0; a < 40; ++a) {
        const auto n = 2 + rng.index(50);
        for (std::size_t i = 0; i < n; ++i)
            gaps[fmt::format("a{}", a)].push_back({fmt::format("a{}_{}", a, i), rng.normal(0.5 * a, 0.1 + a),
                                                   i % 2 ? Period::post : Period::pre});
    }
    const auto ai = ai_likeness_index(gaps);
    double worst = 0.0;
    for (const auto& [author, g2] : gaps) {
        std::vector<double> z;
        for (const auto& e : g2) z.push_back(ai.index.at(e.doc_id));
        worst = std::max({worst, std::abs(*mean_of(z)), std::abs(*sample_sd(z) - 1.0)});
    }
    o.require(worst <= 1e-9, fmt::format("AI-likeness moments off by {:.3g}", worst));

    auto spec = DocCorpusSpec::three_archetypes(10, 5);
    const auto corpus = gen_document_corpus(spec);
    const auto lex = build_lexicon(corpus.docs, Lexicon::defaults());
    fs::create_directories(work);
    write_features_csv(work / "features_a.csv", extract_all(corpus.docs, lex, 1));
    write_features_csv(work / "features_b.csv", extract_all(corpus.docs, lex, 4));
    o.require(read_file(work / "features_a.csv") == read_file(work / "features_b.csv"),
              "feature records differ between runs");
    if (o.pass)
        o.detail = fmt::format("FKGL {:.2f}; TTR 1, 1/150, 0.75; z-score moments within {:.3g}; {} records identical",
                               g, worst, corpus.docs.size());
    return o;
}

Outcome winsorization() {
    Outcome o;
    Rng rng(42);
    std::vector<AuthorDelta> raw;
    for (int i = 0; i < 100; ++i) {
        AuthorDelta a;
        a.author_id = fmt::format("u{:03}", i);
        for (auto& v : a.d) v = rng.normal();
        raw.push_back(a);
    }
    raw[13].d[idx(Feature::fkgl)] = 50.0;
    raw[71].d[idx(Feature::ppl)] = -35.0;
    raw[5].d[idx(Feature::sentlen)] = 20.0;

    std::vector<double> col;
    for (const auto& a : raw) col.push_back(*a.d[idx(Feature::fkgl)]);
    std::sort(col.begin(), col.end());
    const double h = 99.0 * 0.975;
    const auto lo = static_cast<std::size_t>(h);
    const double p975 = col[lo] + (h - static_cast<double>(lo)) * (col[lo + 1] - col[lo]);

    const auto s = winsorize_and_standardize(raw);
    double worst = 0.0;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        std::vector<double> z;
        for (const auto& r : s.rows) z.push_back(*r.d[f]);
        const double mu = *mean_of(z);
        double ss = 0;
        for (double v : z) ss += (v - mu) * (v - mu);
        worst = std::max({worst, std::abs(mu), std::abs(std::sqrt(ss / static_cast<double>(z.size())) - 1.0)});
    }
    const auto& fr = s.report.features[idx(Feature::fkgl)];
    const double clipped = *s.rows[13].d[idx(Feature::fkgl)] * fr.sd + fr.mean;
    o.require(worst < 1e-9, fmt::format("column moments off by {:.3g}", worst));
    o.require(std::abs(clipped - p975) < 1e-9, fmt::format("outlier maps to {:.6f}, expected {:.6f}", clipped, p975));
    if (o.pass) o.detail = fmt::format("100 authors; moments within {:.3g}; +50 clipped to {:.6f}", worst, p975);
    return o;
}

Outcome bootstrap_determinism() {
    Outcome o;
    const auto b = planted_blobs(42);
    const auto base = hdbscan(b.points, HdbscanConfig{});
    BootstrapConfig cfg;
    cfg.seed = 1337;
    const auto r1 = bootstrap_stability(b.points, base.labels, HdbscanConfig{}, cfg);
    const auto r2 = bootstrap_stability(b.points, base.labels, HdbscanConfig{}, cfg);
    o.require(r1.to_json().dump() == r2.to_json().dump(), "reports differ");
    const double m = r1.mean_ari.value_or(0.0);
    o.require(m >= 0.99, fmt::format("mean ARI {:.4f}", m));
    if (o.pass) o.detail = fmt::format("{} iterations, identical reports, mean ARI {:.4f}", r1.iterations, m);
    return o;
}

} // namespace

int main() {
    const fs::path work = fs::temp_directory_path() / "stylo_acceptance";
    const std::vector<std::pair<std::string, std::function<Outcome()>>> checks = {
        {"pelt-exactness", pelt_exactness},
        {"pelt-step-detection", pelt_step},
        {"hdbscan-planted-recovery", hdbscan_blobs},
        {"hdbscan-permutation-invariance", hdbscan_permutation},
        {"validity-metric-oracles", validity_oracles},
        {"end-to-end-archetype-recovery", [&] { return end_to_end(work / "e2e"); }},
        {"statistics-oracles", statistics_oracles},
        {"feature-determinism-and-formulas", [&] { return feature_formulas(work / "features"); }},
        {"winsorization-standardization", winsorization},
        {"bootstrap-determinism", bootstrap_determinism},
    };
    int failures = 0;
    for (const auto& [name, check] : checks) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = fmt::format("exception: {}", e.what());
        }
        fmt::print("{} {}: {}\n", o.pass ? "PASS" : "FAIL", name, o.detail);
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    fmt::print("{} of {} criteria passed\n", checks.size() - static_cast<std::size_t>(failures), checks.size());
    return failures == 0 ? 0 : 1;
}
