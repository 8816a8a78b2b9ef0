#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "planrec/mr_engine.hpp"
#include "planrec/query_text.hpp"

namespace planrec {

struct TermCount {
    std::string term;
    std::string query_id;
    std::uint64_t sum = 0;

    bool operator==(const TermCount&) const = default;
};

struct QueryTotal {
    std::string query_id;
    std::uint64_t n = 0;
    std::vector<std::pair<std::string, std::uint64_t>> entries;  // (term, sum), term order

    bool operator==(const QueryTotal&) const = default;
};

/// TF weights of one query, keyed by term (std::map gives the canonical term
/// order used by every summation downstream).
struct FeatureVector {
    std::string query_id;
    std::map<std::string, double> weights;

    bool operator==(const FeatureVector&) const = default;
};

namespace tf_jobs {

// Record shapes flowing through the three-job chain.
using TermKey = std::pair<std::string, std::string>;                     // (term, query_id)
using CountRecord = mr::KeyValue<TermKey, std::uint64_t>;                // ((term, qid), sum)
using TotalKey = std::pair<std::string, std::uint64_t>;                  // (qid, N)
using TotalRecord = mr::KeyValue<TotalKey, std::pair<std::string, std::uint64_t>>;  // ((qid, N), (term, sum))
using TfRecord = mr::KeyValue<std::string, std::pair<std::string, double>>;        // (qid, (term, tf))

/// Mapper emits ((term, qid), 1) per token; reducer sums.
mr::JobSpec<TokenizedQuery, TermKey, std::uint64_t> count_job(std::size_t partitions = 1);

/// Mapper re-keys by query id; reducer computes N and re-emits every
/// (term, sum) under (qid, N).
mr::JobSpec<CountRecord, std::string, std::pair<std::string, std::uint64_t>, TotalKey,
            std::pair<std::string, std::uint64_t>>
totals_job(std::size_t partitions = 1);

/// Mapper re-keys by term carrying (qid, sum, N); reducer divides once per
/// entry and emits (qid, (term, tf)).
mr::JobSpec<TotalRecord, std::string, std::tuple<std::string, std::uint64_t, std::uint64_t>, std::string,
            std::pair<std::string, double>>
weight_job(std::size_t partitions = 1);

}  // namespace tf_jobs

/// Term multiplicities per (term, query). Throws EmptyQuery if any query has
/// no tokens.
std::vector<TermCount> count_terms_job(const std::vector<TokenizedQuery>& tokenized,
                                       const mr::EngineConfig& cfg = {});

std::vector<QueryTotal> query_totals_job(const std::vector<TermCount>& counts, const mr::EngineConfig& cfg = {});

/// tf = sum / N for every entry; one vector per query, ordered by query id.
std::vector<FeatureVector> tf_job(const std::vector<QueryTotal>& totals, const mr::EngineConfig& cfg = {});

struct QueryFailure {
    std::string query_id;
    std::string message;
};

struct FeaturizeResult {
    std::vector<FeatureVector> vectors;  // ordered by query id
    std::vector<QueryFailure> failures;  // input order
};

/// normalize -> tokenize -> count/totals/weight chain. Queries that fail to
/// parse or yield no terms are reported in `failures`; the call throws only
/// when every query fails. `report` collects engine timings.
FeaturizeResult featurize(const std::vector<Query>& queries, const mr::EngineConfig& cfg = {},
                          mr::TimingReport* report = nullptr);

/// Partition count used by the pipeline for a given engine configuration.
std::size_t pipeline_partitions(const mr::EngineConfig& cfg);

}  // namespace planrec
