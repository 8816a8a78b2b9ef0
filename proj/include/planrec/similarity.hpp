#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "planrec/mr_engine.hpp"
#include "planrec/tf_features.hpp"

namespace planrec {

struct SimilarityEntry {
    std::string q1;  // q1 < q2
    std::string q2;
    double cosine = 0;

    bool operator==(const SimilarityEntry&) const = default;
};

/// Symmetric pairwise distance, d = 1 - cosine, zero diagonal.
template <class Scalar>
struct BasicDistanceMatrix {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    std::vector<std::string> ids;
    Matrix d;

    std::size_t size() const { return ids.size(); }
    Scalar operator()(std::size_t i, std::size_t j) const {
        return d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    bool operator==(const BasicDistanceMatrix& o) const {
        return ids == o.ids && d.rows() == o.d.rows() && d.cols() == o.d.cols() && (d.array() == o.d.array()).all();
    }
};

using DistanceMatrix = BasicDistanceMatrix<double>;

/// Cosine of the angle between two TF vectors: the dot product runs over the
/// shared terms and each norm over the vector's own terms, all in term order.
/// Clamped to [0, 1]. Throws ZeroVector if either norm is zero.
double cosine(const FeatureVector& v1, const FeatureVector& v2);

/// Compact form used inside the pairwise job: term ids assigned in term
/// order, so iteration order (and hence rounding) matches cosine().
using SparseTf = std::vector<std::pair<std::uint32_t, double>>;

double cosine(const SparseTf& a, const SparseTf& b);

/// All n(n-1)/2 cosines as a MapReduce job. The mapper walks tiles of the
/// (i, j) index triangle and emits ((id_i, id_j), (tf_i, tf_j)); the reducer
/// computes the cosine. Vectors are ordered by query id first, so every entry
/// has q1 < q2. Fewer than two vectors yields no entries.
std::vector<SimilarityEntry> pairwise_job(const std::vector<FeatureVector>& vectors,
                                          const mr::EngineConfig& cfg = {}, mr::TimingReport* report = nullptr);

/// Builds the distance matrix over `ids`. Throws MissingPair if any pair is
/// not covered by `entries`.
DistanceMatrix to_distance_matrix(const std::vector<SimilarityEntry>& entries, const std::vector<std::string>& ids);

/// Edge length of the square tiles the pairwise mapper works on.
inline constexpr std::size_t kPairTile = 32;

}  // namespace planrec
