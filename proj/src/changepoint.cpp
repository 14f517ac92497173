#include "stylo/changepoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

namespace stylo {

TimeSeries TimeSeries::from_buckets(const BucketedSeries& s) {
    TimeSeries ts;
    for (const auto& b : s.buckets) {
        if (!b.mean) continue;
        ts.bucket_labels.push_back(b.label);
        ts.values.push_back(*b.mean);
    }
    return ts;
}

void PeltConfig::validate() const {
    if (!(penalty_coeff > 0.0)) throw ConfigError("pelt penalty_coeff must be > 0");
    if (min_size < 1) throw ConfigError("pelt min_size must be >= 1");
    if (jump < 1) throw ConfigError("pelt jump must be >= 1");
}

double PeltConfig::penalty(std::size_t n) const { return n > 0 ? penalty_coeff * std::log(static_cast<double>(n)) : 0.0; }

namespace {

double cost_from_variance(double var, std::size_t len) {
    const double v = std::max(var, kVarianceFloor);
    return static_cast<double>(len) * (std::log(2.0 * std::numbers::pi * v) + 1.0);
}

struct Moments {
    double mean;
    double variance;
};

Moments segment_moments(const std::vector<double>& values, std::size_t a, std::size_t b) {
    const double len = static_cast<double>(b - a);
    double sum = 0.0;
    for (std::size_t i = a; i < b; ++i) sum += values[i];
    const double mean = sum / len;
    double ss = 0.0;
    for (std::size_t i = a; i < b; ++i) ss += (values[i] - mean) * (values[i] - mean);
    return {mean, ss / len};
}

// Prefix sums over mean-centred values for O(1) segment costs inside the DP.
class PrefixCost {
public:
    explicit PrefixCost(const std::vector<double>& values) : s1_(values.size() + 1, 0.0), s2_(values.size() + 1, 0.0) {
        double centre = 0.0;
        for (double v : values) centre += v;
        centre = values.empty() ? 0.0 : centre / static_cast<double>(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double x = values[i] - centre;
            s1_[i + 1] = s1_[i] + x;
            s2_[i + 1] = s2_[i] + x * x;
        }
    }

    double operator()(std::size_t a, std::size_t b) const {
        const double len = static_cast<double>(b - a);
        const double s = s1_[b] - s1_[a];
        const double var = std::max((s2_[b] - s2_[a] - s * s / len) / len, 0.0);
        return cost_from_variance(var, b - a);
    }

private:
    std::vector<double> s1_, s2_;
};

bool nearly_equal(double a, double b) {
    return std::abs(a - b) <= 1e-10 * std::max({1.0, std::abs(a), std::abs(b)});
}

std::vector<std::size_t> admissible_breaks(std::size_t n, const PeltConfig& cfg) {
    std::vector<std::size_t> out;
    for (std::size_t t = cfg.jump; t < n; t += cfg.jump) out.push_back(t);
    return out;
}

SeriesBreaks finish(const TimeSeries& series, std::vector<std::size_t> bkps, double penalty) {
    SeriesBreaks out;
    out.breakpoints = std::move(bkps);
    out.penalty = penalty;
    std::size_t start = 0;
    auto ends = out.breakpoints;
    ends.push_back(series.n());
    double total = 0.0;
    for (std::size_t e : ends) {
        const auto m = segment_moments(series.values, start, e);
        out.segments.push_back({start, e - start, m.mean, m.variance});
        total += cost_from_variance(m.variance, e - start);
        start = e;
    }
    out.total_cost = total + penalty * static_cast<double>(out.breakpoints.size());
    return out;
}

SeriesBreaks too_short(const TimeSeries& series, const PeltConfig& cfg) {
    SeriesBreaks out = series.n() > 0 ? finish(series, {}, cfg.penalty(series.n())) : SeriesBreaks{};
    out.warnings.push_back(fmt::format("series of length {} is shorter than 2*min_size={}; no detection attempted",
                                       series.n(), 2 * cfg.min_size));
    return out;
}

} // namespace

double segment_cost(const std::vector<double>& values, std::size_t a, std::size_t b) {
    if (b <= a || b > values.size()) throw InputError("segment_cost needs 0 <= a < b <= n");
    return cost_from_variance(segment_moments(values, a, b).variance, b - a);
}

SeriesBreaks pelt(const TimeSeries& series, const PeltConfig& cfg) {
    cfg.validate();
    const std::size_t n = series.n();
    if (n < 2 * cfg.min_size) return too_short(series, cfg);

    const double beta = cfg.penalty(n);
    const PrefixCost cost(series.values);
    constexpr double inf = std::numeric_limits<double>::infinity();
    constexpr std::size_t never = std::numeric_limits<std::size_t>::max();

    std::vector<double> F(n + 1, inf);
    std::vector<std::size_t> parent(n + 1, 0);
    std::vector<std::size_t> nbreaks(n + 1, 0);
    std::vector<std::size_t> dead_from(n + 1, never);
    F[0] = -beta;

    auto path = [&](std::size_t t) {
        std::vector<std::size_t> p;
        for (std::size_t cur = t; cur > 0; cur = parent[cur]) p.push_back(cur);
        std::reverse(p.begin(), p.end());
        return p;
    };

    auto ends = admissible_breaks(n, cfg);
    ends.push_back(n);
    std::vector<std::size_t> candidates{0};

    for (std::size_t t : ends) {
        std::vector<std::pair<std::size_t, double>> evaluated;
        std::size_t best = never;
        double best_val = inf;
        for (std::size_t s : candidates) {
            if (t - s < cfg.min_size || dead_from[s] <= t) continue;
            const double seg = cost(s, t);
            const double val = F[s] + seg + beta;
            evaluated.emplace_back(s, F[s] + seg);
            if (best == never || (!nearly_equal(val, best_val) && val < best_val)) {
                best = s;
                best_val = val;
                continue;
            }
            if (!nearly_equal(val, best_val)) continue;
            const std::size_t nb_s = s == 0 ? 0 : nbreaks[s] + 1;
            const std::size_t nb_b = best == 0 ? 0 : nbreaks[best] + 1;
            if (nb_s < nb_b || (nb_s == nb_b && path(s) < path(best))) {
                best = s;
                best_val = val;
            }
        }
        if (best == never) continue;
        F[t] = best_val;
        parent[t] = best;
        nbreaks[t] = best == 0 ? 0 : nbreaks[best] + 1;

        // A candidate whose unpenalized cost already exceeds F[t] can never
        // beat t as the last breakpoint once a feasible segment follows t.
        for (const auto& [s, unpenalized] : evaluated) {
            if (unpenalized > F[t] && !nearly_equal(unpenalized, F[t]))
                dead_from[s] = std::min(dead_from[s], t + cfg.min_size);
        }
        std::erase_if(candidates, [&](std::size_t s) { return dead_from[s] <= t; });
        if (t < n) candidates.push_back(t);
    }

    if (F[n] == inf) return too_short(series, cfg);
    return finish(series, path(parent[n]), beta);
}

SeriesBreaks brute_force_segmentation(const TimeSeries& series, const PeltConfig& cfg) {
    cfg.validate();
    const std::size_t n = series.n();
    if (n > 24) throw InputError("brute_force_segmentation refuses series longer than 24");
    if (n < 2 * cfg.min_size) return too_short(series, cfg);

    const double beta = cfg.penalty(n);
    std::vector<std::vector<double>> table(n + 1, std::vector<double>(n + 1, 0.0));
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b <= n; ++b) table[a][b] = segment_cost(series.values, a, b);

    const auto positions = admissible_breaks(n, cfg);
    std::vector<std::size_t> current;
    std::vector<std::size_t> best;
    double best_val = std::numeric_limits<double>::infinity();
    bool have_best = false;

    // Depth-first enumeration visits equal-length lists in lexicographic order,
    // so keeping the first of equal (cost, count) candidates is the tie rule.
    auto consider = [&](double val) {
        if (!have_best || (!nearly_equal(val, best_val) && val < best_val) ||
            (nearly_equal(val, best_val) && current.size() < best.size())) {
            best = current;
            best_val = val;
            have_best = true;
        }
    };
    auto dfs = [&](auto&& self, std::size_t pos_index, std::size_t last, double acc) -> void {
        if (n - last >= cfg.min_size) consider(acc + table[last][n]);
        for (std::size_t k = pos_index; k < positions.size(); ++k) {
            const std::size_t p = positions[k];
            if (p - last < cfg.min_size) continue;
            current.push_back(p);
            self(self, k + 1, p, acc + table[last][p] + beta);
            current.pop_back();
        }
    };
    dfs(dfs, 0, 0, 0.0);
    if (!have_best) return too_short(series, cfg);
    return finish(series, best, beta);
}

nlohmann::json SeriesBreaks::to_json(const TimeSeries& series) const {
    nlohmann::json labels = nlohmann::json::array();
    for (auto b : breakpoints) labels.push_back(b < series.bucket_labels.size() ? series.bucket_labels[b] : "");
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& s : segments) {
        segs.push_back({{"start", s.start},
                        {"length", s.length},
                        {"mean", s.mean},
                        {"variance", s.variance},
                        {"first_label", s.start < series.bucket_labels.size() ? series.bucket_labels[s.start] : ""}});
    }
    return {{"breakpoints", breakpoints},
            {"bucket_labels_at_breaks", labels},
            {"total_cost", total_cost},
            {"penalty", penalty},
            {"variance_floor", kVarianceFloor},
            {"segments", segs},
            {"warnings", warnings}};
}

} // namespace stylo
