#include "planrec/recommender.hpp"

#include <algorithm>

#include "planrec/error.hpp"

namespace planrec {

namespace {

void assemble(PlanStore& store, const mr::EngineConfig& cfg) {
    std::vector<std::string> ids;
    ids.reserve(store.vectors.size());
    for (const auto& v : store.vectors) ids.push_back(v.query_id);
    store.matrix = to_distance_matrix(pairwise_job(store.vectors, cfg), ids);
    store.model = cluster(store.matrix, store.model.params);
    store.cluster_plan = derive_cluster_plans(store.model, store.plans);
}

}  // namespace

std::string to_string(Verdict v) { return v == Verdict::ReusePlan ? "ReusePlan" : "OptimizeFresh"; }

std::map<ClusterLabel, std::string> derive_cluster_plans(const ClusterModel& model,
                                                         const std::map<std::string, std::string>& plans) {
    struct Tally {
        std::size_t votes = 0;
        std::string first_id;
    };
    std::map<ClusterLabel, std::map<std::string, Tally>> tallies;
    for (std::size_t i = 0; i < model.ids.size(); ++i) {
        if (model.labels[i] == kNoise) continue;
        auto plan = plans.find(model.ids[i]);
        if (plan == plans.end()) throw InvalidParams("no plan recorded for query '" + model.ids[i] + "'");
        auto& t = tallies[model.labels[i]][plan->second];
        if (t.votes++ == 0 || model.ids[i] < t.first_id) t.first_id = model.ids[i];
    }
    std::map<ClusterLabel, std::string> out;
    for (const auto& [label, by_plan] : tallies) {
        const std::string* best = nullptr;
        const Tally* best_tally = nullptr;
        for (const auto& [plan, t] : by_plan) {
            if (!best_tally || t.votes > best_tally->votes ||
                (t.votes == best_tally->votes && t.first_id < best_tally->first_id)) {
                best = &plan;
                best_tally = &t;
            }
        }
        out.emplace(label, *best);
    }
    return out;
}

PlanStore build_store(const std::vector<Query>& queries, const ClusteringParams& params,
                      const mr::EngineConfig& cfg, std::vector<QueryFailure>* rejected) {
    params.validate();
    if (queries.size() < 2)
        throw InsufficientData("need at least 2 queries to build a store, got " + std::to_string(queries.size()));
    for (const auto& q : queries)
        if (!q.qep_hash) throw InvalidParams("query '" + q.id + "' has no qep hash");

    auto features = featurize(queries, cfg);
    if (features.vectors.size() < 2)
        throw InsufficientData("only " + std::to_string(features.vectors.size()) + " of " +
                               std::to_string(queries.size()) + " queries could be featurized");
    if (rejected) *rejected = features.failures;

    PlanStore store;
    store.vectors = std::move(features.vectors);
    store.model.params = params;
    std::map<std::string, const Query*> by_id;
    for (const auto& q : queries) by_id.emplace(q.id, &q);
    for (const auto& v : store.vectors) store.plans.emplace(v.query_id, *by_id.at(v.query_id)->qep_hash);
    assemble(store, cfg);
    return store;
}

FeatureVector query_vector(const Query& query) {
    auto tokenized = tokenize_query(query);
    const mr::EngineConfig cfg = mr::EngineConfig::sequential();
    auto vectors = tf_job(query_totals_job(count_terms_job({tokenized}, cfg), cfg), cfg);
    return std::move(vectors.front());
}

Recommendation recommend(const Query& query, const PlanStore& store, std::optional<double> threshold) {
    return recommend(query_vector(query), store, threshold);
}

Recommendation recommend(const FeatureVector& vector, const PlanStore& store, std::optional<double> threshold) {
    if (store.vectors.empty()) throw EmptyInput();
    const double t = threshold.value_or(1.0 - store.model.params.eps);
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidParams("threshold must be in [0, 1], got " + std::to_string(t));

    Recommendation rec;
    std::size_t best = store.vectors.size();
    for (std::size_t i = 0; i < store.vectors.size(); ++i) {
        if (store.model.labels[i] == kNoise) continue;
        double s = cosine(vector, store.vectors[i]);
        // vectors are in id order, so strict > keeps the lowest id on ties
        if (best == store.vectors.size() || s > rec.similarity) {
            best = i;
            rec.similarity = s;
        }
    }
    if (best == store.vectors.size()) return rec;

    rec.best_match_id = store.vectors[best].query_id;
    if (rec.similarity >= t) {
        rec.verdict = Verdict::ReusePlan;
        rec.cluster_id = store.model.labels[best];
        rec.qep_hash = store.cluster_plan.at(rec.cluster_id);
    }
    return rec;
}

PlanStore update_store(const PlanStore& store, const Query& query, const std::string& fresh_qep_hash,
                       const mr::EngineConfig& cfg) {
    if (store.plans.contains(query.id)) throw DuplicateId(query.id);
    PlanStore next;
    next.vectors = store.vectors;
    auto v = query_vector(query);
    auto at = std::lower_bound(next.vectors.begin(), next.vectors.end(), v.query_id,
                               [](const FeatureVector& f, const std::string& id) { return f.query_id < id; });
    next.vectors.insert(at, std::move(v));
    next.plans = store.plans;
    next.plans.emplace(query.id, fresh_qep_hash);
    next.model.params = store.model.params;
    assemble(next, cfg);
    return next;
}

}  // namespace planrec
