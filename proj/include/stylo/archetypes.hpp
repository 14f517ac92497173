#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace stylo {

struct HdbscanConfig {
    std::size_t min_cluster_size = 15;
    /// Core distance is the distance to the min_samples-th nearest other point.
    std::size_t min_samples = 5;
    double alpha = 1.0;

    void validate() const;
};

/// One row of the condensed tree: `child` is a point id (< n) or a cluster id (>= n).
struct CondensedEdge {
    std::size_t parent = 0;
    std::size_t child = 0;
    double lambda = 0.0;
    std::size_t size = 0;
};

struct ClusterResult {
    std::vector<int> labels;              ///< -1 is noise
    std::vector<double> membership_strength;
    std::vector<double> stabilities;      ///< per output label
    std::vector<std::size_t> sizes;       ///< per output label
    std::vector<CondensedEdge> condensed_tree;
    std::vector<std::size_t> selected_nodes; ///< condensed-tree ids of the output labels

    std::size_t cluster_count() const { return stabilities.size(); }
    std::size_t noise_count() const;
};

/// HDBSCAN with excess-of-mass selection over Euclidean mutual reachability.
/// Throws InputError on ragged, non-finite, or too-small input.
ClusterResult hdbscan(const Eigen::MatrixXd& points, const HdbscanConfig& cfg);

/// Minimum spanning tree of a dense symmetric weight matrix (Prim).
struct MstEdge {
    std::size_t a = 0;
    std::size_t b = 0;
    double weight = 0.0;
};
std::vector<MstEdge> prim_mst(const Eigen::MatrixXd& weights);

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& points);
std::vector<double> core_distances(const Eigen::MatrixXd& distances, std::size_t min_samples);

/// Mean silhouette over non-noise points; nullopt with fewer than two clusters.
/// Members of singleton clusters contribute 0.
std::optional<double> silhouette_inliers(const Eigen::MatrixXd& points, const std::vector<int>& labels);

/// Davies-Bouldin index over non-noise clusters; nullopt with fewer than two clusters.
std::optional<double> davies_bouldin(const Eigen::MatrixXd& points, const std::vector<int>& labels);

/// Adjusted Rand index. Noise (-1) is treated as an ordinary class.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

/// Per-cluster mean of the rows carrying each label (noise excluded).
std::vector<Eigen::VectorXd> cluster_centroids(const Eigen::MatrixXd& points, const std::vector<int>& labels);

struct BootstrapConfig {
    std::size_t iterations = 1000;
    double sample_ratio = 0.8;
    std::uint64_t seed = 1337;
    double ari_threshold = 0.73;
    int jobs = 1;
};

struct StabilityReport {
    std::size_t iterations = 0;
    double sample_ratio = 0.0;
    std::uint64_t seed = 0;
    std::size_t valid_iterations = 0;
    std::size_t skipped_iterations = 0;
    std::optional<double> mean_ari;
    std::optional<double> ari_ci_lo;
    std::optional<double> ari_ci_hi;
    std::optional<double> consistency;
    bool passes_threshold = false;
    double ari_threshold = 0.0;

    nlohmann::json to_json() const;
};

/// Subsample-and-recluster stability. Each iteration draws ceil(ratio * n)
/// points without replacement with seed (seed + iteration), reclusters, and
/// scores ARI against the base labels on points that are non-noise in both.
/// Iterations with fewer than two such points are skipped and counted.
StabilityReport bootstrap_stability(const Eigen::MatrixXd& points, const std::vector<int>& base_labels,
                                    const HdbscanConfig& hcfg, const BootstrapConfig& bcfg);

enum class Archetype { Adopter, Resistor, Pragmatist, Unnamed };
std::string to_string(Archetype a);

struct NamingConfig {
    double style_threshold = 0.25;
};

/// A cluster centroid on the archetype map: style axis is the perplexity-gap
/// change, theme axis the AI-topic-share change.
struct MapCentroid {
    double style = 0.0;
    double theme = 0.0;
};

/// Adopter: the largest style centroid when above +threshold. Resistor: the
/// smallest when below -threshold. Pragmatist: |style| <= threshold with
/// positive theme. Everything else: Unnamed.
std::vector<Archetype> name_archetypes(const std::vector<MapCentroid>& centroids, const NamingConfig& cfg = {});

} // namespace stylo
