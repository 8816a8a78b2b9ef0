#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "planrec/similarity.hpp"

namespace planrec {

struct ClusteringParams {
    double eps = 0.5;        // distance radius, (0, 1]
    std::size_t min_pts = 3; // neighborhood size (self included) that makes a core point

    /// Throws InvalidParams when out of range.
    void validate() const;
    bool operator==(const ClusteringParams&) const = default;
};

using ClusterLabel = std::int32_t;
inline constexpr ClusterLabel kNoise = -1;

struct ClusterModel {
    std::vector<std::string> ids;
    std::vector<ClusterLabel> labels;  // cluster ids 0.. in discovery order, or kNoise
    ClusteringParams params;

    std::size_t cluster_count() const;
    bool operator==(const ClusterModel&) const = default;
};

/// Indices q with d(p, q) <= eps, ascending; always contains p.
std::vector<std::size_t> eps_neighborhood(const DistanceMatrix& m, std::size_t p, double eps);

bool is_core(const DistanceMatrix& m, std::size_t p, const ClusteringParams& params);

/// DBSCAN over a precomputed distance matrix. Points are scanned in index
/// order; a border point reachable from several clusters joins the first one
/// that reaches it. Throws EmptyInput for an empty matrix.
ClusterModel cluster(const DistanceMatrix& m, const ClusteringParams& params);

}  // namespace planrec
