#include "stylo/archetypes.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "stylo/common.hpp"

namespace stylo {

void HdbscanConfig::validate() const {
    if (min_cluster_size < 2) throw ConfigError("hdbscan min_cluster_size must be >= 2");
    if (min_samples < 1) throw ConfigError("hdbscan min_samples must be >= 1");
    if (!(alpha > 0.0)) throw ConfigError("hdbscan alpha must be > 0");
}

std::size_t ClusterResult::noise_count() const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), -1));
}

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& points) {
    const auto n = points.rows();
    Eigen::MatrixXd d(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = (points.row(i) - points.row(j)).norm();
            d(i, j) = v;
            d(j, i) = v;
        }
    }
    return d;
}

std::vector<double> core_distances(const Eigen::MatrixXd& distances, std::size_t min_samples) {
    const auto n = static_cast<std::size_t>(distances.rows());
    std::vector<double> core(n);
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) row[j] = distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        // The point itself sits at rank 0 with distance 0.
        std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(min_samples), row.end());
        core[i] = row[min_samples];
    }
    return core;
}

std::vector<MstEdge> prim_mst(const Eigen::MatrixXd& w) {
    const auto n = static_cast<std::size_t>(w.rows());
    std::vector<MstEdge> edges;
    if (n < 2) return edges;
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<bool> in_tree(n, false);
    std::vector<double> best(n, inf);
    std::vector<std::size_t> from(n, 0);
    std::size_t current = 0;
    in_tree[0] = true;
    for (std::size_t step = 1; step < n; ++step) {
        std::size_t next = n;
        double next_w = inf;
        for (std::size_t j = 0; j < n; ++j) {
            if (in_tree[j]) continue;
            const double cand = w(static_cast<Eigen::Index>(current), static_cast<Eigen::Index>(j));
            if (cand < best[j]) {
                best[j] = cand;
                from[j] = current;
            }
            if (best[j] < next_w || next == n) {
                next = j;
                next_w = best[j];
            }
        }
        in_tree[next] = true;
        edges.push_back({from[next], next, next_w});
        current = next;
    }
    return edges;
}

namespace {

constexpr double kMinDistance = 1e-12; // caps lambda for coincident points

double lambda_of(double dist) { return 1.0 / std::max(dist, kMinDistance); }

struct LinkageNode {
    std::size_t left = 0;
    std::size_t right = 0;
    double dist = 0.0;
    std::size_t size = 0;
};

// Node ids: points are 0..n-1, merges are n..2n-2 in ascending distance.
std::vector<LinkageNode> single_linkage(std::vector<MstEdge> edges, std::size_t n) {
    std::stable_sort(edges.begin(), edges.end(), [](const MstEdge& x, const MstEdge& y) {
        if (x.weight != y.weight) return x.weight < y.weight;
        return std::minmax(x.a, x.b) < std::minmax(y.a, y.b);
    });
    std::vector<std::size_t> parent(2 * n - 1);
    std::iota(parent.begin(), parent.end(), 0);
    std::vector<std::size_t> size(2 * n - 1, 1);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    std::vector<LinkageNode> nodes;
    nodes.reserve(n - 1);
    for (const auto& e : edges) {
        const std::size_t ra = find(e.a);
        const std::size_t rb = find(e.b);
        const std::size_t id = n + nodes.size();
        nodes.push_back({ra, rb, e.weight, size[ra] + size[rb]});
        parent[ra] = id;
        parent[rb] = id;
        size[id] = size[ra] + size[rb];
    }
    return nodes;
}

std::vector<CondensedEdge> condense(const std::vector<LinkageNode>& nodes, std::size_t n, std::size_t min_cluster_size) {
    std::vector<CondensedEdge> out;
    const std::size_t root = 2 * n - 2;
    auto size_of = [&](std::size_t id) { return id < n ? std::size_t{1} : nodes[id - n].size; };
    auto fall_out = [&](std::size_t sub, std::size_t parent_label, double lambda) {
        std::vector<std::size_t> stack{sub};
        while (!stack.empty()) {
            const std::size_t x = stack.back();
            stack.pop_back();
            if (x < n) {
                out.push_back({parent_label, x, lambda, 1});
            } else {
                stack.push_back(nodes[x - n].right);
                stack.push_back(nodes[x - n].left);
            }
        }
    };

    std::size_t next_label = n + 1;
    std::deque<std::pair<std::size_t, std::size_t>> queue{{root, n}}; // (linkage node, condensed label)
    while (!queue.empty()) {
        const auto [node, label] = queue.front();
        queue.pop_front();
        if (node < n) continue;
        const auto& ln = nodes[node - n];
        const double lambda = lambda_of(ln.dist);
        const std::size_t lc = size_of(ln.left);
        const std::size_t rc = size_of(ln.right);
        const bool left_big = lc >= min_cluster_size;
        const bool right_big = rc >= min_cluster_size;
        if (left_big && right_big) {
            const std::size_t ll = next_label++;
            const std::size_t rl = next_label++;
            out.push_back({label, ll, lambda, lc});
            out.push_back({label, rl, lambda, rc});
            queue.emplace_back(ln.left, ll);
            queue.emplace_back(ln.right, rl);
        } else if (!left_big && !right_big) {
            fall_out(ln.left, label, lambda);
            fall_out(ln.right, label, lambda);
        } else if (!left_big) {
            fall_out(ln.left, label, lambda);
            queue.emplace_back(ln.right, label);
        } else {
            fall_out(ln.right, label, lambda);
            queue.emplace_back(ln.left, label);
        }
    }
    return out;
}

} // namespace

ClusterResult hdbscan(const Eigen::MatrixXd& points, const HdbscanConfig& cfg) {
    cfg.validate();
    const auto n = static_cast<std::size_t>(points.rows());
    if (n < cfg.min_cluster_size || n <= cfg.min_samples)
        throw InputError(fmt::format("hdbscan needs at least max(min_cluster_size, min_samples + 1) points, got {}", n));
    if (!points.allFinite()) throw InputError("hdbscan input contains non-finite coordinates");

    const Eigen::MatrixXd dist = pairwise_distances(points);
    const auto core = core_distances(dist, cfg.min_samples);
    Eigen::MatrixXd reach(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
            reach(ii, jj) = i == j ? 0.0 : std::max({core[i], core[j], dist(ii, jj) / cfg.alpha});
        }

    ClusterResult res;
    res.condensed_tree = condense(single_linkage(prim_mst(reach), n), n, cfg.min_cluster_size);
    const auto& tree = res.condensed_tree;

    std::size_t max_label = n;
    for (const auto& e : tree) max_label = std::max({max_label, e.parent, e.child});
    const std::size_t nclusters = max_label - n + 1; // condensed ids n..max_label
    auto ci = [n](std::size_t id) { return id - n; };

    std::vector<double> birth(nclusters, 0.0);
    std::vector<std::size_t> cluster_parent(nclusters, 0);
    std::vector<std::vector<std::size_t>> children(nclusters);
    std::vector<std::size_t> point_parent(n, n);
    std::vector<double> point_lambda(n, 0.0);
    for (const auto& e : tree) {
        if (e.child >= n) {
            birth[ci(e.child)] = e.lambda;
            cluster_parent[ci(e.child)] = e.parent;
            children[ci(e.parent)].push_back(e.child);
        } else {
            point_parent[e.child] = e.parent;
            point_lambda[e.child] = e.lambda;
        }
    }
    std::vector<double> stability(nclusters, 0.0);
    for (const auto& e : tree) stability[ci(e.parent)] += (e.lambda - birth[ci(e.parent)]) * static_cast<double>(e.size);

    // Excess of mass, leaves first. The root is never selected.
    std::vector<bool> selected(nclusters, false);
    std::vector<double> propagated = stability;
    for (std::size_t c = nclusters; c-- > 1;) {
        double subtree = 0.0;
        for (auto ch : children[c]) subtree += propagated[ci(ch)];
        if (children[c].empty() || stability[c] > subtree) {
            selected[c] = true;
            std::vector<std::size_t> stack(children[c].begin(), children[c].end());
            while (!stack.empty()) {
                const std::size_t x = stack.back();
                stack.pop_back();
                selected[ci(x)] = false;
                for (auto ch : children[ci(x)]) stack.push_back(ch);
            }
        } else {
            propagated[c] = subtree;
        }
    }

    std::vector<int> label_of(nclusters, -1);
    for (std::size_t c = 1; c < nclusters; ++c) {
        if (!selected[c]) continue;
        label_of[c] = static_cast<int>(res.selected_nodes.size());
        res.selected_nodes.push_back(n + c);
        res.stabilities.push_back(stability[c]);
    }

    res.labels.assign(n, -1);
    res.membership_strength.assign(n, 0.0);
    std::vector<double> max_lambda(res.selected_nodes.size(), 0.0);
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t c = point_parent[p]; c != n; c = cluster_parent[ci(c)]) {
            if (label_of[ci(c)] >= 0) {
                res.labels[p] = label_of[ci(c)];
                break;
            }
        }
        if (res.labels[p] >= 0) {
            auto& m = max_lambda[static_cast<std::size_t>(res.labels[p])];
            m = std::max(m, point_lambda[p]);
        }
    }
    res.sizes.assign(res.selected_nodes.size(), 0);
    for (std::size_t p = 0; p < n; ++p) {
        if (res.labels[p] < 0) continue;
        const auto l = static_cast<std::size_t>(res.labels[p]);
        ++res.sizes[l];
        res.membership_strength[p] = max_lambda[l] > 0.0 ? point_lambda[p] / max_lambda[l] : 1.0;
    }
    return res;
}

} // namespace stylo
