#include "stylo/archetypes.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "stylo/common.hpp"

namespace stylo {

namespace {

// Maps non-noise labels to 0..k-1 in ascending label order.
std::map<int, std::size_t> dense_labels(const std::vector<int>& labels) {
    std::map<int, std::size_t> m;
    for (int l : labels)
        if (l >= 0) m.emplace(l, 0);
    std::size_t k = 0;
    for (auto& [l, i] : m) i = k++;
    return m;
}

} // namespace

std::vector<Eigen::VectorXd> cluster_centroids(const Eigen::MatrixXd& points, const std::vector<int>& labels) {
    const auto dense = dense_labels(labels);
    std::vector<Eigen::VectorXd> sums(dense.size(), Eigen::VectorXd::Zero(points.cols()));
    std::vector<double> counts(dense.size(), 0.0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) continue;
        const auto k = dense.at(labels[i]);
        sums[k] += points.row(static_cast<Eigen::Index>(i)).transpose();
        counts[k] += 1.0;
    }
    for (std::size_t k = 0; k < sums.size(); ++k) sums[k] /= counts[k];
    return sums;
}

std::optional<double> silhouette_inliers(const Eigen::MatrixXd& points, const std::vector<int>& labels) {
    if (labels.size() != static_cast<std::size_t>(points.rows())) throw InputError("silhouette: label count mismatch");
    const auto dense = dense_labels(labels);
    if (dense.size() < 2) return std::nullopt;

    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] >= 0) members.push_back(i);
    std::vector<std::size_t> cluster_size(dense.size(), 0);
    for (auto i : members) ++cluster_size[dense.at(labels[i])];

    double total = 0.0;
    std::vector<double> dist_sum(dense.size());
    for (auto i : members) {
        std::fill(dist_sum.begin(), dist_sum.end(), 0.0);
        for (auto j : members) {
            if (i == j) continue;
            dist_sum[dense.at(labels[j])] +=
                (points.row(static_cast<Eigen::Index>(i)) - points.row(static_cast<Eigen::Index>(j))).norm();
        }
        const auto own = dense.at(labels[i]);
        if (cluster_size[own] < 2) continue; // singleton contributes 0
        const double a = dist_sum[own] / static_cast<double>(cluster_size[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < dense.size(); ++k)
            if (k != own) b = std::min(b, dist_sum[k] / static_cast<double>(cluster_size[k]));
        const double denom = std::max(a, b);
        if (denom > 0.0) total += (b - a) / denom;
    }
    return total / static_cast<double>(members.size());
}

std::optional<double> davies_bouldin(const Eigen::MatrixXd& points, const std::vector<int>& labels) {
    if (labels.size() != static_cast<std::size_t>(points.rows())) throw InputError("davies_bouldin: label count mismatch");
    const auto dense = dense_labels(labels);
    const std::size_t k = dense.size();
    if (k < 2) return std::nullopt;
    const auto centroids = cluster_centroids(points, labels);
    std::vector<double> scatter(k, 0.0);
    std::vector<double> count(k, 0.0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) continue;
        const auto c = dense.at(labels[i]);
        scatter[c] += (points.row(static_cast<Eigen::Index>(i)).transpose() - centroids[c]).norm();
        count[c] += 1.0;
    }
    for (std::size_t c = 0; c < k; ++c) scatter[c] /= count[c];

    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        double worst = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            const double sep = (centroids[i] - centroids[j]).norm();
            // Coincident centroids contribute 0, as in the common reference implementation.
            const double r = sep > 0.0 ? (scatter[i] + scatter[j]) / sep : 0.0;
            worst = std::max(worst, r);
        }
        total += worst;
    }
    return total / static_cast<double>(k);
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw InputError("adjusted_rand_index: labelings differ in length");
    const auto n = static_cast<__int128>(a.size());
    if (n < 2) return 1.0;
    std::map<std::pair<int, int>, std::int64_t> cells;
    std::map<int, std::int64_t> rows, cols;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++cells[{a[i], b[i]}];
        ++rows[a[i]];
        ++cols[b[i]];
    }
    auto pairs = [](__int128 x) { return x * (x - 1) / 2; };
    __int128 index = 0, sum_a = 0, sum_b = 0;
    for (const auto& [k, v] : cells) index += pairs(v);
    for (const auto& [k, v] : rows) sum_a += pairs(v);
    for (const auto& [k, v] : cols) sum_b += pairs(v);
    const __int128 total = pairs(n);
    // ARI scaled by 2*C(n,2) to stay in exact integer arithmetic.
    const __int128 num = 2 * index * total - 2 * sum_a * sum_b;
    const __int128 den = (sum_a + sum_b) * total - 2 * sum_a * sum_b;
    if (den == 0) return 1.0; // both labelings trivial (all-one or all-singleton)
    return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
}

std::string to_string(Archetype a) {
    switch (a) {
    case Archetype::Adopter: return "Adopter";
    case Archetype::Resistor: return "Resistor";
    case Archetype::Pragmatist: return "Pragmatist";
    case Archetype::Unnamed: return "Unnamed";
    }
    return "Unnamed";
}

std::vector<Archetype> name_archetypes(const std::vector<MapCentroid>& centroids, const NamingConfig& cfg) {
    std::vector<Archetype> out(centroids.size(), Archetype::Unnamed);
    if (centroids.empty()) return out;
    const auto by_style = [](const MapCentroid& x, const MapCentroid& y) { return x.style < y.style; };
    const auto hi = static_cast<std::size_t>(std::max_element(centroids.begin(), centroids.end(), by_style) - centroids.begin());
    const auto lo = static_cast<std::size_t>(std::min_element(centroids.begin(), centroids.end(), by_style) - centroids.begin());
    if (centroids[hi].style > cfg.style_threshold) out[hi] = Archetype::Adopter;
    if (centroids[lo].style < -cfg.style_threshold) out[lo] = Archetype::Resistor;
    for (std::size_t i = 0; i < centroids.size(); ++i) {
        if (out[i] != Archetype::Unnamed) continue;
        if (std::abs(centroids[i].style) <= cfg.style_threshold && centroids[i].theme > 0.0) out[i] = Archetype::Pragmatist;
    }
    return out;
}

} // namespace stylo
