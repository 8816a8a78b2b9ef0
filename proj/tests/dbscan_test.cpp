#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "oracles.hpp"
#include "planrec/dbscan.hpp"
#include "planrec/error.hpp"

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

DistanceMatrix four_points() {
    return matrix_of({{0, 0.1, 0.9, 0.9}, {0.1, 0, 0.9, 0.9}, {0.9, 0.9, 0, 0.9}, {0.9, 0.9, 0.9, 0}});
}

DistanceMatrix permuted(const DistanceMatrix& m, const std::vector<std::size_t>& order) {
    DistanceMatrix out;
    const auto n = static_cast<Eigen::Index>(order.size());
    out.d.resize(n, n);
    for (std::size_t i = 0; i < order.size(); ++i) {
        out.ids.push_back(m.ids[order[i]]);
        for (std::size_t j = 0; j < order.size(); ++j)
            out.d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(order[i], order[j]);
    }
    return out;
}

}  // namespace

TEST(Params, Validation) {
    EXPECT_NO_THROW((ClusteringParams{1.0, 1}.validate()));
    EXPECT_THROW((ClusteringParams{0.0, 2}.validate()), InvalidParams);
    EXPECT_THROW((ClusteringParams{1.5, 2}.validate()), InvalidParams);
    EXPECT_THROW((ClusteringParams{0.5, 0}.validate()), InvalidParams);
    EXPECT_THROW(cluster(four_points(), {0.5, 0}), InvalidParams);
}

TEST(EpsNeighborhood, Examples) {
    std::mt19937_64 rng(1);
    auto m = gen::random_matrix(rng, 10);
    std::vector<std::size_t> all(10);
    std::iota(all.begin(), all.end(), 0);
    EXPECT_EQ(eps_neighborhood(m, 3, 1.0), all);
    EXPECT_EQ(eps_neighborhood(four_points(), 2, 0.5), (std::vector<std::size_t>{2}));
    EXPECT_EQ(eps_neighborhood(four_points(), 0, 0.2), (std::vector<std::size_t>{0, 1}));
}

TEST(EpsNeighborhood, BoundaryIncluded) {
    auto m = matrix_of({{0, 0.25}, {0.25, 0}});
    EXPECT_EQ(eps_neighborhood(m, 0, 0.25), (std::vector<std::size_t>{0, 1}));
}

TEST(IsCore, Examples) {
    auto m = four_points();
    for (std::size_t p = 0; p < 4; ++p) {
        EXPECT_TRUE(is_core(m, p, {0.2, 1}));
        EXPECT_FALSE(is_core(m, p, {0.2, 5}));
    }
    EXPECT_TRUE(is_core(m, 0, {0.2, 2}));
    EXPECT_FALSE(is_core(m, 2, {0.2, 2}));
}

TEST(Cluster, AllIdentical) {
    auto m = matrix_of(std::vector<std::vector<double>>(5, std::vector<double>(5, 0.0)));
    auto model = cluster(m, {0.1, 3});
    EXPECT_EQ(model.labels, std::vector<ClusterLabel>(5, 0));
    EXPECT_EQ(model.cluster_count(), 1u);
    EXPECT_EQ(model.ids, m.ids);
}

TEST(Cluster, SinglePointIsNoise) {
    auto model = cluster(matrix_of({{0}}), {0.5, 2});
    EXPECT_EQ(model.labels, std::vector<ClusterLabel>{kNoise});
    EXPECT_EQ(model.cluster_count(), 0u);
}

TEST(Cluster, EmptyInput) {
    EXPECT_THROW(cluster(DistanceMatrix{}, {0.5, 2}), EmptyInput);
}

TEST(Cluster, FourPointMatrix) {
    auto model = cluster(four_points(), {0.2, 2});
    EXPECT_EQ(model.labels, (std::vector<ClusterLabel>{0, 0, kNoise, kNoise}));
}

TEST(Cluster, BorderPointGoesToFirstDiscoveredCluster) {
    // cores 2 and 4 seed two clusters; point 3 is within eps of both but not core
    std::vector<std::vector<double>> rows(7, std::vector<double>(7, 0.9));
    for (std::size_t i = 0; i < 7; ++i) rows[i][i] = 0;
    for (auto group : {std::vector<std::size_t>{0, 1, 2}, std::vector<std::size_t>{4, 5, 6}})
        for (auto i : group)
            for (auto j : group)
                if (i != j) rows[i][j] = 0.1;
    rows[2][3] = rows[3][2] = rows[3][4] = rows[4][3] = 0.2;
    auto m = matrix_of(rows);
    ClusteringParams p{0.2, 4};
    ASSERT_TRUE(is_core(m, 2, p));
    ASSERT_TRUE(is_core(m, 4, p));
    ASSERT_FALSE(is_core(m, 3, p));
    EXPECT_EQ(cluster(m, p).labels, (std::vector<ClusterLabel>{0, 0, 0, 0, 1, 1, 1}));
    auto reversed = cluster(permuted(m, {6, 5, 4, 3, 2, 1, 0}), p);
    EXPECT_EQ(reversed.labels, (std::vector<ClusterLabel>{0, 0, 0, 0, 1, 1, 1}));
    EXPECT_EQ(reversed.ids[3], "p3");
}

TEST(Cluster, NoisePointLaterClaimedAsBorder) {
    // point 0 is scanned first, is not core, but is reachable from core 1
    auto m = matrix_of({{0, 0.1, 0.9, 0.9}, {0.1, 0, 0.1, 0.1}, {0.9, 0.1, 0, 0.9}, {0.9, 0.1, 0.9, 0}});
    auto model = cluster(m, {0.15, 3});
    EXPECT_EQ(model.labels, (std::vector<ClusterLabel>{0, 0, 0, 0}));
}

TEST(Cluster, MatchesBruteForceReference) {
    std::mt19937_64 rng(99);
    for (int c = 0; c < 120; ++c) {
        std::size_t n = 1 + rng() % 40;
        auto m = gen::random_matrix(rng, n, 1 + static_cast<int>(rng() % 20));
        ClusteringParams p{(1 + rng() % 20) / 20.0, 1 + rng() % 6};
        auto model = cluster(m, p);
        auto diff = oracle::compare(model, oracle::dbscan(m, p.eps, p.min_pts));
        ASSERT_TRUE(diff.empty()) << "case " << c << ": " << diff;
    }
}

TEST(ClusterProperties, CoreMembershipAndMaximality) {
    std::mt19937_64 rng(5);
    for (int c = 0; c < 60; ++c) {
        auto m = gen::random_matrix(rng, 30);
        ClusteringParams p{(1 + rng() % 10) / 20.0, 2 + rng() % 4};
        auto model = cluster(m, p);
        std::vector<bool> core(m.size());
        for (std::size_t i = 0; i < m.size(); ++i) core[i] = is_core(m, i, p);
        std::set<ClusterLabel> used;
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (model.labels[i] == kNoise) continue;
            used.insert(model.labels[i]);
            bool near_core = false;
            for (std::size_t j = 0; j < m.size(); ++j)
                if (core[j] && model.labels[j] == model.labels[i] && (i == j || m(i, j) <= p.eps)) near_core = true;
            EXPECT_TRUE(near_core) << "point " << i;
            for (std::size_t j = 0; j < m.size(); ++j)
                if (core[i] && core[j] && m(i, j) <= p.eps) EXPECT_EQ(model.labels[i], model.labels[j]);
        }
        // consecutive ids from 0, numbered by the scan position of each seed
        std::map<ClusterLabel, std::size_t> seed;
        for (std::size_t i = 0; i < m.size(); ++i)
            if (core[i] && model.labels[i] != kNoise) seed.emplace(model.labels[i], i);
        ASSERT_EQ(seed.size(), used.size());
        ClusterLabel expected = 0;
        std::size_t last = 0;
        for (const auto& [label, first] : seed) {
            EXPECT_EQ(label, expected++);
            if (label > 0) EXPECT_GT(first, last);
            last = first;
        }
    }
}

TEST(ClusterProperties, PermutationQuasiInvariance) {
    std::mt19937_64 rng(6);
    for (int c = 0; c < 40; ++c) {
        std::size_t n = 5 + rng() % 30;
        auto m = gen::random_matrix(rng, n);
        ClusteringParams p{(1 + rng() % 10) / 20.0, 2 + rng() % 3};
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        auto a = cluster(m, p);
        auto b = cluster(permuted(m, order), p);

        auto core_partition = [&](const ClusterModel& model, const DistanceMatrix& mm) {
            std::map<ClusterLabel, std::set<std::string>> groups;
            std::set<std::string> noise;
            for (std::size_t i = 0; i < mm.size(); ++i) {
                if (is_core(mm, i, p)) groups[model.labels[i]].insert(mm.ids[i]);
                if (model.labels[i] == kNoise) noise.insert(mm.ids[i]);
            }
            std::set<std::set<std::string>> parts;
            for (auto& [l, g] : groups) parts.insert(g);
            return std::make_pair(parts, noise);
        };
        EXPECT_EQ(core_partition(a, m), core_partition(b, permuted(m, order)));
    }
}

TEST(ClusterProperties, LargerEpsNeverAddsNoise) {
    std::mt19937_64 rng(7);
    for (int c = 0; c < 40; ++c) {
        auto m = gen::random_matrix(rng, 25);
        std::size_t min_pts = 2 + rng() % 4;
        std::size_t previous = m.size() + 1;
        for (double eps = 0.05; eps <= 1.0; eps += 0.05) {
            auto model = cluster(m, {eps, min_pts});
            auto noise = static_cast<std::size_t>(std::count(model.labels.begin(), model.labels.end(), kNoise));
            EXPECT_LE(noise, previous);
            previous = noise;
        }
    }
}
