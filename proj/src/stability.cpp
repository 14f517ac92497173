#include "stylo/archetypes.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <thread>

#include "stylo/common.hpp"
#include "stylo/rng.hpp"

namespace stylo {

namespace {

struct IterationOutcome {
    std::optional<double> ari;
    std::vector<std::size_t> sample;
    std::vector<int> mapped; ///< recluster labels translated to base labels, per sample index
};

IterationOutcome run_iteration(const Eigen::MatrixXd& points, const std::vector<int>& base, const HdbscanConfig& hcfg,
                               std::size_t draw, std::uint64_t seed) {
    IterationOutcome out;
    Rng rng(seed);
    out.sample = rng.sample_without_replacement(static_cast<std::size_t>(points.rows()), draw);
    Eigen::MatrixXd sub(static_cast<Eigen::Index>(out.sample.size()), points.cols());
    for (std::size_t i = 0; i < out.sample.size(); ++i)
        sub.row(static_cast<Eigen::Index>(i)) = points.row(static_cast<Eigen::Index>(out.sample[i]));

    std::vector<int> labels;
    try {
        labels = hdbscan(sub, hcfg).labels;
    } catch (const InputError&) {
        labels.assign(out.sample.size(), -1);
    }

    // Majority mapping from recluster labels to base labels, for consistency.
    std::map<int, std::map<int, std::size_t>> votes;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] >= 0) ++votes[labels[i]][base[out.sample[i]]];
    std::map<int, int> to_base;
    for (const auto& [l, counts] : votes) {
        int best = -1;
        std::size_t best_n = 0;
        for (const auto& [b, c] : counts)
            if (c > best_n) {
                best = b;
                best_n = c;
            }
        to_base[l] = best;
    }
    out.mapped.resize(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) out.mapped[i] = labels[i] >= 0 ? to_base[labels[i]] : -1;

    std::vector<int> a, b;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int bl = base[out.sample[i]];
        if (bl < 0 || labels[i] < 0) continue;
        a.push_back(bl);
        b.push_back(labels[i]);
    }
    if (a.size() >= 2) out.ari = adjusted_rand_index(a, b);
    return out;
}

} // namespace

StabilityReport bootstrap_stability(const Eigen::MatrixXd& points, const std::vector<int>& base_labels,
                                    const HdbscanConfig& hcfg, const BootstrapConfig& bcfg) {
    const auto n = static_cast<std::size_t>(points.rows());
    if (base_labels.size() != n) throw InputError("bootstrap_stability: label count mismatch");
    if (!(bcfg.sample_ratio > 0.0 && bcfg.sample_ratio <= 1.0)) throw ConfigError("bootstrap sample_ratio must be in (0, 1]");

    StabilityReport rep;
    rep.iterations = bcfg.iterations;
    rep.sample_ratio = bcfg.sample_ratio;
    rep.seed = bcfg.seed;
    rep.ari_threshold = bcfg.ari_threshold;

    const auto draw = static_cast<std::size_t>(std::ceil(bcfg.sample_ratio * static_cast<double>(n) - 1e-9));
    std::vector<IterationOutcome> outcomes(bcfg.iterations);
    const auto workers = static_cast<std::size_t>(std::clamp(bcfg.jobs, 1, 64));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < outcomes.size(); i = next++)
            outcomes[i] = run_iteration(points, base_labels, hcfg, draw, bcfg.seed + i);
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }

    std::vector<double> aris;
    std::vector<std::map<int, std::size_t>> seen(n);
    for (const auto& o : outcomes) {
        if (o.ari) aris.push_back(*o.ari);
        for (std::size_t i = 0; i < o.sample.size(); ++i) ++seen[o.sample[i]][o.mapped[i]];
    }
    rep.valid_iterations = aris.size();
    rep.skipped_iterations = outcomes.size() - aris.size();
    if (!aris.empty()) {
        rep.mean_ari = *mean_of(aris);
        rep.ari_ci_lo = percentile_linear(aris, 0.025);
        rep.ari_ci_hi = percentile_linear(aris, 0.975);
        rep.passes_threshold = *rep.mean_ari >= bcfg.ari_threshold;
    }

    double total = 0.0;
    std::size_t counted = 0;
    for (const auto& s : seen) {
        std::size_t appearances = 0, modal = 0;
        for (const auto& [label, c] : s) {
            appearances += c;
            modal = std::max(modal, c);
        }
        if (appearances == 0) continue;
        total += static_cast<double>(modal) / static_cast<double>(appearances);
        ++counted;
    }
    if (counted > 0) rep.consistency = total / static_cast<double>(counted);
    return rep;
}

nlohmann::json StabilityReport::to_json() const {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    return {{"iterations", iterations},
            {"sample_ratio", sample_ratio},
            {"seed", seed},
            {"valid_iterations", valid_iterations},
            {"skipped_iterations", skipped_iterations},
            {"mean_ari", opt(mean_ari)},
            {"ari_ci95", {opt(ari_ci_lo), opt(ari_ci_hi)}},
            {"consistency", opt(consistency)},
            {"ari_threshold", ari_threshold},
            {"passes_threshold", passes_threshold}};
}

} // namespace stylo
