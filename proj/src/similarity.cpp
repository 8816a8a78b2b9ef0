#include "planrec/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

#include "planrec/error.hpp"

namespace planrec {

namespace {

double finish(double dot, double norm1, double norm2) {
    if (norm1 == 0.0 || norm2 == 0.0) throw ZeroVector();
    // sqrt of the product, so identical vectors give exactly 1
    double c = dot / std::sqrt(norm1 * norm2);
    return std::clamp(c, 0.0, 1.0);
}

}  // namespace

double cosine(const FeatureVector& v1, const FeatureVector& v2) {
    double dot = 0, n1 = 0, n2 = 0;
    for (const auto& [term, w] : v1.weights) n1 += w * w;
    for (const auto& [term, w] : v2.weights) n2 += w * w;
    auto a = v1.weights.begin();
    auto b = v2.weights.begin();
    while (a != v1.weights.end() && b != v2.weights.end()) {
        if (a->first < b->first) {
            ++a;
        } else if (b->first < a->first) {
            ++b;
        } else {
            dot += a->second * b->second;
            ++a;
            ++b;
        }
    }
    return finish(dot, n1, n2);
}

double cosine(const SparseTf& v1, const SparseTf& v2) {
    double dot = 0, n1 = 0, n2 = 0;
    for (const auto& [t, w] : v1) n1 += w * w;
    for (const auto& [t, w] : v2) n2 += w * w;
    auto a = v1.begin();
    auto b = v2.begin();
    while (a != v1.end() && b != v2.end()) {
        if (a->first < b->first) {
            ++a;
        } else if (b->first < a->first) {
            ++b;
        } else {
            dot += a->second * b->second;
            ++a;
            ++b;
        }
    }
    return finish(dot, n1, n2);
}

std::vector<SimilarityEntry> pairwise_job(const std::vector<FeatureVector>& vectors, const mr::EngineConfig& cfg,
                                          mr::TimingReport* report) {
    std::vector<const FeatureVector*> sorted;
    sorted.reserve(vectors.size());
    for (const auto& v : vectors) {
        if (v.weights.empty()) throw ZeroVector();
        sorted.push_back(&v);
    }
    std::sort(sorted.begin(), sorted.end(),
              [](const FeatureVector* a, const FeatureVector* b) { return a->query_id < b->query_id; });
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i]->query_id == sorted[i - 1]->query_id) throw DuplicateId(sorted[i]->query_id);
    if (sorted.size() < 2) return {};

    // term ids in term order so SparseTf iteration matches FeatureVector iteration
    std::map<std::string, std::uint32_t> vocabulary;
    for (const auto* v : sorted)
        for (const auto& [term, w] : v->weights) vocabulary.emplace(term, 0);
    std::uint32_t next = 0;
    for (auto& [term, id] : vocabulary) id = next++;

    std::vector<SparseTf> tfs;
    std::vector<std::string> ids;
    tfs.reserve(sorted.size());
    for (const auto* v : sorted) {
        SparseTf tf;
        tf.reserve(v->weights.size());
        for (const auto& [term, w] : v->weights) tf.emplace_back(vocabulary.at(term), w);
        tfs.push_back(std::move(tf));
        ids.push_back(v->query_id);
    }

    const std::size_t n = tfs.size();
    const std::size_t blocks = (n + kPairTile - 1) / kPairTile;
    using Tile = std::pair<std::uint32_t, std::uint32_t>;
    std::vector<Tile> tiles;
    for (std::uint32_t bi = 0; bi < blocks; ++bi)
        for (std::uint32_t bj = bi; bj < blocks; ++bj) tiles.emplace_back(bi, bj);

    using Key = std::pair<std::string, std::string>;
    using Value = std::pair<SparseTf, SparseTf>;
    mr::JobSpec<Tile, Key, Value, Key, double> job;
    job.name = "pairwise-cosine";
    job.partitions = pipeline_partitions(cfg);
    job.map = [&](const Tile& tile) {
        std::vector<mr::KeyValue<Key, Value>> out;
        std::size_t i0 = tile.first * kPairTile, i1 = std::min(n, i0 + kPairTile);
        std::size_t j0 = tile.second * kPairTile, j1 = std::min(n, j0 + kPairTile);
        for (std::size_t i = i0; i < i1; ++i)
            for (std::size_t j = std::max(j0, i + 1); j < j1; ++j) out.push_back({{ids[i], ids[j]}, {tfs[i], tfs[j]}});
        return out;
    };
    job.reduce = [](const Key& key, std::span<const Value> values) {
        std::vector<mr::KeyValue<Key, double>> out;
        out.reserve(values.size());
        for (const auto& [a, b] : values) out.push_back({key, cosine(a, b)});
        return out;
    };

    auto records = mr::run_job(tiles, job, cfg, report);
    std::vector<SimilarityEntry> entries;
    entries.reserve(records.size());
    for (auto& r : records) entries.push_back({std::move(r.key.first), std::move(r.key.second), r.value});
    return entries;
}

DistanceMatrix to_distance_matrix(const std::vector<SimilarityEntry>& entries, const std::vector<std::string>& ids) {
    std::unordered_map<std::string, Eigen::Index> index;
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (!index.emplace(ids[i], static_cast<Eigen::Index>(i)).second) throw DuplicateId(ids[i]);

    const auto n = static_cast<Eigen::Index>(ids.size());
    DistanceMatrix m;
    m.ids = ids;
    m.d = DistanceMatrix::Matrix::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
    m.d.diagonal().setZero();
    for (const auto& e : entries) {
        auto a = index.find(e.q1);
        auto b = index.find(e.q2);
        if (a == index.end() || b == index.end())
            throw InvalidParams("similarity entry (" + e.q1 + ", " + e.q2 + ") refers to an unknown id");
        if (a->second == b->second) continue;
        double dist = 1.0 - e.cosine;
        m.d(a->second, b->second) = dist;
        m.d(b->second, a->second) = dist;
    }
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            if (std::isnan(m.d(i, j)))
                throw MissingPair(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    return m;
}

}  // namespace planrec
