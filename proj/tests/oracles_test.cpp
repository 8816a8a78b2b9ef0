// Checks of the test-only reference implementations against hand-computed
// values. These run before anything else trusts the oracles.

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"

using namespace planrec;

namespace {

DistanceMatrix matrix_of(std::vector<std::vector<double>> rows) {
    DistanceMatrix m;
    const auto n = static_cast<Eigen::Index>(rows.size());
    m.d.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        m.ids.push_back("p" + std::to_string(i));
        for (Eigen::Index j = 0; j < n; ++j) m.d(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    return m;
}

}  // namespace

TEST(DenseCosine, HandValues) {
    FeatureVector a{"a", {{"a", 0.5}, {"b", 0.5}}}, c{"c", {{"a", 0.5}, {"c", 0.5}}};
    EXPECT_NEAR(oracle::dense_cosine(a, c), 0.5, 1e-15);
    EXPECT_NEAR(oracle::dense_cosine(a, a), 1.0, 1e-15);
    FeatureVector x{"x", {{"SELECT a", 0.5}, {"FROM t", 0.5}}};
    FeatureVector y{"y", {{"SELECT a", 1.0 / 3}, {"FROM t", 1.0 / 3}, {"WHERE c", 1.0 / 3}}};
    EXPECT_NEAR(oracle::dense_cosine(x, y), 2.0 / std::sqrt(6.0), 1e-15);
    EXPECT_NEAR(oracle::dense_cosine(x, y), 0.816496580927726, 1e-15);
    FeatureVector z{"z", {{"SELECT b", 1.0}}};
    EXPECT_EQ(oracle::dense_cosine(x, z), 0.0);
}

TEST(DenseCosine, PairwiseCountsAndOrder) {
    std::vector<FeatureVector> vs{{"c", {{"t", 1}}}, {"a", {{"t", 1}}}, {"b", {{"u", 1}}}};
    auto pairs = oracle::pairwise(vs);
    ASSERT_EQ(pairs.size(), 3u);
    EXPECT_EQ(pairs[0].q1, "a");
    EXPECT_EQ(pairs[0].q2, "b");
    EXPECT_EQ(pairs[1].q2, "c");
    EXPECT_EQ(pairs[1].cosine, 1.0);
    EXPECT_EQ(pairs[2].q1, "b");
}

TEST(DbscanReference, FourPointMatrix) {
    auto m = matrix_of({{0, 0.1, 0.9, 0.9}, {0.1, 0, 0.9, 0.9}, {0.9, 0.9, 0, 0.9}, {0.9, 0.9, 0.9, 0}});
    auto ref = oracle::dbscan(m, 0.2, 2);
    EXPECT_EQ(ref.core_partition, (std::set<std::set<std::size_t>>{{0, 1}}));
    EXPECT_EQ(ref.noise, (std::set<std::size_t>{2, 3}));
}

TEST(DbscanReference, ChainAndBorder) {
    // 0-1-2 chained cores at min_pts 2, 3 a border of 2 only when min_pts 3
    auto m = matrix_of({{0, 0.2, 0.6, 0.9}, {0.2, 0, 0.2, 0.9}, {0.6, 0.2, 0, 0.2}, {0.9, 0.9, 0.2, 0}});
    auto two = oracle::dbscan(m, 0.2, 2);
    EXPECT_EQ(two.core_partition, (std::set<std::set<std::size_t>>{{0, 1, 2, 3}}));
    auto three = oracle::dbscan(m, 0.2, 3);
    EXPECT_EQ(three.core_partition, (std::set<std::set<std::size_t>>{{1, 2}}));
    EXPECT_TRUE(three.noise.empty());
    EXPECT_EQ(three.admissible[3], (std::set<std::size_t>{0}));
    EXPECT_EQ(three.admissible[0], (std::set<std::size_t>{0}));
}

TEST(PurityReference, HandValues) {
    EXPECT_EQ(oracle::purity({0, 0, 1, 1}, {0, 0, 1, 1}), 1.0);
    EXPECT_EQ(oracle::purity({0, 0, 0, 0}, {0, 0, 1, 1}), 0.5);
    EXPECT_EQ(oracle::purity({0, -1, 1, 1}, {0, 0, 1, 1}), 0.75);
    EXPECT_EQ(oracle::purity({-1, -1}, {0, 1}), 0.0);
}
