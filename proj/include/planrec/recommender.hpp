#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "planrec/dbscan.hpp"
#include "planrec/mr_engine.hpp"
#include "planrec/query_text.hpp"
#include "planrec/similarity.hpp"
#include "planrec/tf_features.hpp"

namespace planrec {

struct PlanStore {
    std::vector<FeatureVector> vectors;  // ordered by query id
    DistanceMatrix matrix;               // over vectors, same order
    ClusterModel model;                  // same order
    std::map<std::string, std::string> plans;          // query id -> qep hash
    std::map<ClusterLabel, std::string> cluster_plan;  // cluster -> representative qep hash

    std::size_t size() const { return vectors.size(); }
    bool operator==(const PlanStore&) const = default;
};

enum class Verdict { ReusePlan, OptimizeFresh };

std::string to_string(Verdict v);

struct Recommendation {
    Verdict verdict = Verdict::OptimizeFresh;
    double similarity = 0;      // best similarity found
    std::string qep_hash;       // ReusePlan only
    ClusterLabel cluster_id = kNoise;
    std::string best_match_id;  // empty when nothing matched at all

    bool reuse() const { return verdict == Verdict::ReusePlan; }
    bool operator==(const Recommendation&) const = default;
};

/// Majority qep hash per cluster; a tie goes to the hash of the lowest
/// query id among the tied members.
std::map<ClusterLabel, std::string> derive_cluster_plans(const ClusterModel& model,
                                                         const std::map<std::string, std::string>& plans);

/// featurize -> pairwise_job -> to_distance_matrix -> cluster. Every query
/// must carry a qep hash. Queries that fail to featurize are left out and
/// reported through `rejected` when given.
PlanStore build_store(const std::vector<Query>& queries, const ClusteringParams& params,
                      const mr::EngineConfig& cfg = {}, std::vector<QueryFailure>* rejected = nullptr);

/// TF vector of a single query computed in isolation.
FeatureVector query_vector(const Query& query);

/// 1-NN over the stored non-noise vectors; ties go to the lowest query id.
/// Threshold defaults to 1 - eps of the store's clustering.
Recommendation recommend(const Query& query, const PlanStore& store, std::optional<double> threshold = {});
Recommendation recommend(const FeatureVector& vector, const PlanStore& store, std::optional<double> threshold = {});

/// Adds one query with its freshly optimized plan and reclusters everything.
PlanStore update_store(const PlanStore& store, const Query& query, const std::string& fresh_qep_hash,
                       const mr::EngineConfig& cfg = {});

}  // namespace planrec
