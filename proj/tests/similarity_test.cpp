#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "planrec/error.hpp"
#include "planrec/similarity.hpp"

using namespace planrec;
using mr::EngineConfig;
using mr::Shuffle;

namespace {

std::vector<FeatureVector> random_vectors(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<FeatureVector> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(gen::random_vector(rng, "q" + std::to_string(100 + i)));
    return out;
}

std::vector<std::string> ids_of(const std::vector<FeatureVector>& vs) {
    std::vector<std::string> ids;
    for (const auto& v : vs) ids.push_back(v.query_id);
    return ids;
}

}  // namespace

TEST(Cosine, SelfSimilarity) {
    auto vs = random_vectors(100, 1);
    for (const auto& v : vs) EXPECT_NEAR(cosine(v, v), 1.0, 1e-12);
}

TEST(Cosine, DisjointIsZero) {
    EXPECT_EQ(cosine(FeatureVector{"a", {{"x", 0.5}, {"y", 0.5}}}, FeatureVector{"b", {{"z", 1.0}}}), 0.0);
}

TEST(Cosine, HalfOverlap) {
    FeatureVector a{"a", {{"a", 0.5}, {"b", 0.5}}}, c{"c", {{"a", 0.5}, {"c", 0.5}}};
    EXPECT_NEAR(cosine(a, c), 0.5, 1e-12);
}

TEST(Cosine, MatchesDenseOracle) {
    auto vs = random_vectors(60, 2);
    for (std::size_t i = 0; i < vs.size(); ++i)
        for (std::size_t j = 0; j < vs.size(); ++j) EXPECT_NEAR(cosine(vs[i], vs[j]), oracle::dense_cosine(vs[i], vs[j]), 1e-12);
}

TEST(Cosine, SymmetricExactly) {
    auto vs = random_vectors(40, 3);
    for (std::size_t i = 0; i < vs.size(); ++i)
        for (std::size_t j = 0; j < vs.size(); ++j) EXPECT_EQ(cosine(vs[i], vs[j]), cosine(vs[j], vs[i]));
}

TEST(Cosine, RangeAndScaleInvariance) {
    auto vs = random_vectors(40, 4);
    for (std::size_t i = 0; i + 1 < vs.size(); ++i) {
        double c = cosine(vs[i], vs[i + 1]);
        EXPECT_GE(c, 0.0);
        EXPECT_LE(c, 1.0);
        for (double k : {0.001, 3.0, 1e6}) {
            auto a = vs[i], b = vs[i + 1];
            for (auto& [t, w] : a.weights) w *= k;
            for (auto& [t, w] : b.weights) w *= k;
            EXPECT_NEAR(cosine(a, b), c, 1e-12);
        }
    }
}

TEST(Cosine, ZeroVectorRejected) {
    FeatureVector empty{"e", {}}, zero{"z", {{"x", 0.0}}}, v{"v", {{"x", 1.0}}};
    EXPECT_THROW(cosine(empty, v), ZeroVector);
    EXPECT_THROW(cosine(v, zero), ZeroVector);
}

TEST(Cosine, SparseFormAgreesBitForBit) {
    auto vs = random_vectors(30, 5);
    std::map<std::string, std::uint32_t> ids;
    for (const auto& v : vs)
        for (const auto& [t, w] : v.weights) ids.emplace(t, 0);
    std::uint32_t next = 0;
    for (auto& [t, id] : ids) id = next++;
    auto sparse = [&](const FeatureVector& v) {
        SparseTf s;
        for (const auto& [t, w] : v.weights) s.emplace_back(ids[t], w);
        return s;
    };
    for (std::size_t i = 0; i < vs.size(); ++i)
        for (std::size_t j = 0; j < vs.size(); ++j) EXPECT_EQ(cosine(sparse(vs[i]), sparse(vs[j])), cosine(vs[i], vs[j]));
}

TEST(PairwiseJob, TwoIdenticalVectors) {
    FeatureVector v{"b", {{"x", 1.0}}};
    auto e = pairwise_job({v, FeatureVector{"a", {{"x", 1.0}}}});
    ASSERT_EQ(e.size(), 1u);
    EXPECT_EQ(e[0], (SimilarityEntry{"a", "b", 1.0}));
}

TEST(PairwiseJob, PairCountAndOrdering) {
    for (std::size_t n : {2u, 3u, 31u, 32u, 33u, 70u}) {
        auto vs = random_vectors(n, n);
        std::reverse(vs.begin(), vs.end());
        auto e = pairwise_job(vs, EngineConfig::parallel(3));
        ASSERT_EQ(e.size(), n * (n - 1) / 2) << n;
        std::set<std::pair<std::string, std::string>> seen;
        for (const auto& x : e) {
            EXPECT_LT(x.q1, x.q2);
            seen.insert({x.q1, x.q2});
        }
        EXPECT_EQ(seen.size(), e.size());
    }
}

TEST(PairwiseJob, FewerThanTwoVectors) {
    EXPECT_TRUE(pairwise_job({}).empty());
    EXPECT_TRUE(pairwise_job({FeatureVector{"a", {{"x", 1.0}}}}).empty());
}

TEST(PairwiseJob, MatchesDoubleLoopOracle) {
    auto vs = random_vectors(50, 6);
    auto expected = oracle::pairwise(vs);
    for (auto cfg : {EngineConfig::sequential(), EngineConfig::parallel(4), EngineConfig::parallel(2, Shuffle::DiskSpill)}) {
        auto e = pairwise_job(vs, cfg);
        ASSERT_EQ(e.size(), expected.size());
        for (std::size_t i = 0; i < e.size(); ++i) {
            EXPECT_EQ(e[i].q1, expected[i].q1);
            EXPECT_EQ(e[i].q2, expected[i].q2);
            EXPECT_NEAR(e[i].cosine, expected[i].cosine, 1e-12);
        }
    }
}

TEST(PairwiseJob, ExecutorIndependent) {
    auto vs = random_vectors(80, 7);
    auto expected = pairwise_job(vs, EngineConfig::sequential());
    for (std::size_t w : {1u, 2u, 8u})
        for (auto s : {Shuffle::InMemory, Shuffle::DiskSpill}) EXPECT_EQ(pairwise_job(vs, EngineConfig::parallel(w, s)), expected);
}

TEST(PairwiseJob, BadInput) {
    EXPECT_THROW(pairwise_job({FeatureVector{"a", {{"x", 1.0}}}, FeatureVector{"a", {{"y", 1.0}}}}), DuplicateId);
    EXPECT_THROW(pairwise_job({FeatureVector{"a", {{"x", 1.0}}}, FeatureVector{"b", {}}}), ZeroVector);
}

TEST(DistanceMatrix, Conversion) {
    auto m = to_distance_matrix({{"a", "b", 1.0}, {"a", "c", 0.0}, {"b", "c", 0.5}}, {"a", "b", "c"});
    EXPECT_EQ(m(0, 1), 0.0);
    EXPECT_EQ(m(0, 2), 1.0);
    EXPECT_EQ(m(1, 2), 0.5);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(m(i, i), 0.0);
        for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(m(i, j), m(j, i));
    }
}

TEST(DistanceMatrix, InvariantsOnRandomVectors) {
    auto vs = random_vectors(45, 8);
    auto m = to_distance_matrix(pairwise_job(vs, EngineConfig::parallel(2)), ids_of(vs));
    ASSERT_EQ(m.size(), vs.size());
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j) {
            EXPECT_GE(m(i, j), 0.0);
            EXPECT_LE(m(i, j), 1.0);
            EXPECT_EQ(m(i, j), m(j, i));
        }
}

TEST(DistanceMatrix, MissingPairDetected) {
    try {
        to_distance_matrix({{"a", "b", 1.0}, {"a", "c", 0.0}}, {"a", "b", "c"});
        FAIL();
    } catch (const MissingPair& e) {
        EXPECT_EQ(e.i(), 1u);
        EXPECT_EQ(e.j(), 2u);
    }
    EXPECT_THROW(to_distance_matrix({{"a", "zz", 1.0}}, {"a", "b"}), InvalidParams);
}
