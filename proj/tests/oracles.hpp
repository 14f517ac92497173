#pragma once

// Slow, direct reimplementations used to cross-check the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline double dist(const Eigen::MatrixXd& p, Eigen::Index i, Eigen::Index j) { return (p.row(i) - p.row(j)).norm(); }

inline std::map<int, std::vector<Eigen::Index>> members_of(const std::vector<int>& labels) {
    std::map<int, std::vector<Eigen::Index>> m;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] >= 0) m[labels[i]].push_back(static_cast<Eigen::Index>(i));
    return m;
}

// Pair counting over all n(n-1)/2 pairs; noise is an ordinary class.
inline double ari(const std::vector<int>& a, const std::vector<int>& b) {
    const std::size_t n = a.size();
    double same_a = 0, same_b = 0, same_both = 0, pairs = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            pairs += 1;
            same_a += a[i] == a[j];
            same_b += b[i] == b[j];
            same_both += a[i] == a[j] && b[i] == b[j];
        }
    if (pairs == 0) return 1.0;
    const double expected = same_a * same_b / pairs;
    const double max_index = 0.5 * (same_a + same_b);
    if (max_index == expected) return 1.0;
    return (same_both - expected) / (max_index - expected);
}

inline std::optional<double> silhouette(const Eigen::MatrixXd& p, const std::vector<int>& labels) {
    const auto members = members_of(labels);
    if (members.size() < 2) return std::nullopt;
    double total = 0;
    std::size_t count = 0;
    for (const auto& [lab, idx] : members) {
        for (auto i : idx) {
            ++count;
            if (idx.size() == 1) continue;
            double a = 0;
            for (auto j : idx)
                if (j != i) a += dist(p, i, j);
            a /= static_cast<double>(idx.size() - 1);
            double b = std::numeric_limits<double>::infinity();
            for (const auto& [other, oidx] : members) {
                if (other == lab) continue;
                double m = 0;
                for (auto j : oidx) m += dist(p, i, j);
                b = std::min(b, m / static_cast<double>(oidx.size()));
            }
            const double denom = std::max(a, b);
            total += denom > 0 ? (b - a) / denom : 0.0;
        }
    }
    return total / static_cast<double>(count);
}

inline std::optional<double> davies_bouldin(const Eigen::MatrixXd& p, const std::vector<int>& labels) {
    const auto members = members_of(labels);
    if (members.size() < 2) return std::nullopt;
    std::vector<Eigen::VectorXd> c;
    std::vector<double> s;
    for (const auto& [lab, idx] : members) {
        Eigen::VectorXd m = Eigen::VectorXd::Zero(p.cols());
        for (auto i : idx) m += p.row(i).transpose();
        m /= static_cast<double>(idx.size());
        double sc = 0;
        for (auto i : idx) sc += (p.row(i).transpose() - m).norm();
        c.push_back(m);
        s.push_back(sc / static_cast<double>(idx.size()));
    }
    double total = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        double worst = 0;
        for (std::size_t j = 0; j < c.size(); ++j) {
            if (i == j) continue;
            const double sep = (c[i] - c[j]).norm();
            worst = std::max(worst, sep > 0 ? (s[i] + s[j]) / sep : 0.0);
        }
        total += worst;
    }
    return total / static_cast<double>(c.size());
}

inline double segment_cost(const std::vector<double>& v, std::size_t a, std::size_t b) {
    const double L = static_cast<double>(b - a);
    double m = 0;
    for (std::size_t i = a; i < b; ++i) m += v[i];
    m /= L;
    double ss = 0;
    for (std::size_t i = a; i < b; ++i) ss += (v[i] - m) * (v[i] - m);
    const double var = std::max(ss / L, 1e-8);
    return L * (std::log(2.0 * std::numbers::pi * var) + 1.0);
}

// Every subset of interior cut positions, as a bitmask.
inline double best_segmentation(const std::vector<double>& v, double penalty_coeff, std::size_t min_size,
                                 std::size_t jump) {
    const std::size_t n = v.size();
    const double beta = penalty_coeff * std::log(static_cast<double>(n));
    double best = segment_cost(v, 0, n);
    for (std::uint32_t mask = 1; mask < (1u << (n - 1)); ++mask) {
        std::vector<std::size_t> cuts{0};
        bool ok = true;
        for (std::size_t p = 1; p < n; ++p) {
            if (!(mask & (1u << (p - 1)))) continue;
            if (p % jump != 0) ok = false;
            cuts.push_back(p);
        }
        cuts.push_back(n);
        double total = 0;
        for (std::size_t k = 0; ok && k + 1 < cuts.size(); ++k) {
            if (cuts[k + 1] - cuts[k] < min_size) ok = false;
            else total += segment_cost(v, cuts[k], cuts[k + 1]);
        }
        if (!ok) continue;
        best = std::min(best, total + beta * static_cast<double>(cuts.size() - 2));
    }
    return best;
}

} // namespace oracle
