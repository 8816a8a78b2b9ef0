#include "planrec/tf_features.hpp"

#include <algorithm>
#include <set>

#include "planrec/error.hpp"

namespace planrec {

namespace tf_jobs {

mr::JobSpec<TokenizedQuery, TermKey, std::uint64_t> count_job(std::size_t partitions) {
    mr::JobSpec<TokenizedQuery, TermKey, std::uint64_t> job;
    job.name = "term-count";
    job.partitions = partitions;
    job.map = [](const TokenizedQuery& q) {
        std::vector<mr::KeyValue<TermKey, std::uint64_t>> out;
        out.reserve(q.terms.size());
        for (const auto& term : q.terms) out.push_back({{term, q.id}, 1});
        return out;
    };
    job.reduce = [](const TermKey& key, std::span<const std::uint64_t> counts) {
        std::uint64_t sum = 0;
        for (auto c : counts) sum += c;
        return std::vector<mr::KeyValue<TermKey, std::uint64_t>>{{key, sum}};
    };
    return job;
}

mr::JobSpec<CountRecord, std::string, std::pair<std::string, std::uint64_t>, TotalKey,
            std::pair<std::string, std::uint64_t>>
totals_job(std::size_t partitions) {
    using Entry = std::pair<std::string, std::uint64_t>;
    mr::JobSpec<CountRecord, std::string, Entry, TotalKey, Entry> job;
    job.name = "query-total";
    job.partitions = partitions;
    job.map = [](const CountRecord& rec) {
        return std::vector<mr::KeyValue<std::string, Entry>>{{rec.key.second, {rec.key.first, rec.value}}};
    };
    job.reduce = [](const std::string& qid, std::span<const Entry> entries) {
        std::uint64_t n = 0;
        for (const auto& e : entries) n += e.second;
        std::vector<mr::KeyValue<TotalKey, Entry>> out;
        out.reserve(entries.size());
        for (const auto& e : entries) out.push_back({{qid, n}, e});
        return out;
    };
    return job;
}

mr::JobSpec<TotalRecord, std::string, std::tuple<std::string, std::uint64_t, std::uint64_t>, std::string,
            std::pair<std::string, double>>
weight_job(std::size_t partitions) {
    using Carried = std::tuple<std::string, std::uint64_t, std::uint64_t>;  // (qid, sum, N)
    using Weight = std::pair<std::string, double>;
    mr::JobSpec<TotalRecord, std::string, Carried, std::string, Weight> job;
    job.name = "term-weight";
    job.partitions = partitions;
    job.map = [](const TotalRecord& rec) {
        return std::vector<mr::KeyValue<std::string, Carried>>{
            {rec.value.first, Carried{rec.key.first, rec.value.second, rec.key.second}}};
    };
    job.reduce = [](const std::string& term, std::span<const Carried> carried) {
        std::vector<mr::KeyValue<std::string, Weight>> out;
        out.reserve(carried.size());
        for (const auto& [qid, sum, n] : carried) {
            double tf = static_cast<double>(sum) / static_cast<double>(n);
            out.push_back({qid, {term, tf}});
        }
        return out;
    };
    return job;
}

}  // namespace tf_jobs

namespace {

std::vector<TermCount> to_term_counts(const std::vector<tf_jobs::CountRecord>& records) {
    std::vector<TermCount> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back({r.key.first, r.key.second, r.value});
    return out;
}

std::vector<QueryTotal> to_query_totals(const std::vector<tf_jobs::TotalRecord>& records) {
    std::vector<QueryTotal> out;
    for (const auto& r : records) {
        if (out.empty() || out.back().query_id != r.key.first) out.push_back({r.key.first, r.key.second, {}});
        out.back().entries.push_back(r.value);
    }
    return out;
}

std::vector<FeatureVector> to_feature_vectors(const std::vector<tf_jobs::TfRecord>& records) {
    std::vector<FeatureVector> out;
    for (const auto& r : records) {
        if (out.empty() || out.back().query_id != r.key) out.push_back({r.key, {}});
        out.back().weights.emplace(r.value.first, r.value.second);
    }
    return out;
}

}  // namespace

std::size_t pipeline_partitions(const mr::EngineConfig& cfg) {
    return cfg.executor == mr::Executor::Parallel ? std::max<std::size_t>(1, cfg.workers) : 1;
}

std::vector<TermCount> count_terms_job(const std::vector<TokenizedQuery>& tokenized, const mr::EngineConfig& cfg) {
    for (const auto& q : tokenized)
        if (q.terms.empty()) throw EmptyQuery(q.id);
    return to_term_counts(mr::run_job(tokenized, tf_jobs::count_job(pipeline_partitions(cfg)), cfg));
}

std::vector<QueryTotal> query_totals_job(const std::vector<TermCount>& counts, const mr::EngineConfig& cfg) {
    std::vector<tf_jobs::CountRecord> records;
    records.reserve(counts.size());
    for (const auto& c : counts) records.push_back({{c.term, c.query_id}, c.sum});
    return to_query_totals(mr::run_job(records, tf_jobs::totals_job(pipeline_partitions(cfg)), cfg));
}

std::vector<FeatureVector> tf_job(const std::vector<QueryTotal>& totals, const mr::EngineConfig& cfg) {
    std::vector<tf_jobs::TotalRecord> records;
    for (const auto& t : totals) {
        if (t.n == 0) throw InvalidParams("query '" + t.query_id + "' has a zero term total");
        for (const auto& e : t.entries) records.push_back({{t.query_id, t.n}, e});
    }
    return to_feature_vectors(mr::run_job(records, tf_jobs::weight_job(pipeline_partitions(cfg)), cfg));
}

FeaturizeResult featurize(const std::vector<Query>& queries, const mr::EngineConfig& cfg,
                          mr::TimingReport* report) {
    cfg.validate();
    FeaturizeResult result;
    if (queries.empty()) return result;

    std::set<std::string> seen;
    for (const auto& q : queries)
        if (!seen.insert(q.id).second) throw DuplicateId(q.id);

    // Tokenizing is pure per query; split it across the same worker budget.
    std::vector<std::optional<TokenizedQuery>> tokenized(queries.size());
    std::vector<std::string> errors(queries.size());
    std::size_t workers = cfg.executor == mr::Executor::Parallel ? cfg.workers : 1;
    std::size_t n_tasks = std::min(queries.size(), workers * 4);
    mr::detail::run_tasks(n_tasks, workers, [&](std::size_t task) {
        for (std::size_t i = queries.size() * task / n_tasks; i < queries.size() * (task + 1) / n_tasks; ++i) {
            try {
                tokenized[i] = tokenize_query(queries[i]);
            } catch (const Error& e) {
                errors[i] = e.what();
            }
        }
    });

    std::vector<TokenizedQuery> ok;
    ok.reserve(queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i) {
        if (tokenized[i]) ok.push_back(std::move(*tokenized[i]));
        else result.failures.push_back({queries[i].id, errors[i]});
    }
    if (ok.empty()) {
        throw InsufficientData("all " + std::to_string(queries.size()) + " queries failed to featurize; first: " +
                               result.failures.front().query_id + ": " + result.failures.front().message);
    }

    std::size_t parts = pipeline_partitions(cfg);
    auto records = mr::chain(ok, cfg, report, tf_jobs::count_job(parts), tf_jobs::totals_job(parts),
                             tf_jobs::weight_job(parts));
    result.vectors = to_feature_vectors(records);
    return result;
}

}  // namespace planrec
