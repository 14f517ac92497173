#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stylo/corpus.hpp"

namespace stylo {

struct TimeSeries {
    std::vector<std::string> bucket_labels;
    std::vector<double> values;

    std::size_t n() const { return values.size(); }
    /// Non-missing buckets of a bucketed series, in calendar order.
    static TimeSeries from_buckets(const BucketedSeries& s);
};

struct PeltConfig {
    double penalty_coeff = 4.2; ///< penalty = coeff * ln(n)
    std::size_t min_size = 1;
    std::size_t jump = 2;

    void validate() const;
    double penalty(std::size_t n) const;
};

/// Floor applied to the segment variance MLE.
inline constexpr double kVarianceFloor = 1e-8;

/// Twice the Gaussian negative log-likelihood at the MLE (mean and variance):
/// L * (ln(2*pi*var) + 1) over values[a, b).
double segment_cost(const std::vector<double>& values, std::size_t a, std::size_t b);

struct SegmentStats {
    std::size_t start = 0;
    std::size_t length = 0;
    double mean = 0.0;
    double variance = 0.0; ///< biased MLE, before flooring
};

struct SeriesBreaks {
    std::vector<std::size_t> breakpoints; ///< first index of each new segment
    double total_cost = 0.0;               ///< segment costs plus penalty per breakpoint
    double penalty = 0.0;
    std::vector<SegmentStats> segments;
    std::vector<std::string> warnings;

    nlohmann::json to_json(const TimeSeries& series) const;
};

/// Exact penalized segmentation by PELT. Breakpoints are restricted to
/// multiples of `jump` and every segment has at least `min_size` points.
/// Ties prefer fewer breakpoints, then the lexicographically smallest list.
SeriesBreaks pelt(const TimeSeries& series, const PeltConfig& cfg);

/// Exhaustive search over admissible breakpoint sets; same objective and
/// tie-breaking as pelt. Refuses series longer than 24.
SeriesBreaks brute_force_segmentation(const TimeSeries& series, const PeltConfig& cfg);

} // namespace stylo
