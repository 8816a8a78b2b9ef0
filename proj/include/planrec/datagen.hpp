#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "planrec/dbscan.hpp"
#include "planrec/query_text.hpp"

namespace planrec {

/// Values a placeholder may take: a string literal picked from `choices`, or
/// an integer in [lo, hi] when `choices` is empty.
struct ValueDomain {
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    std::vector<std::string> choices;

    bool operator==(const ValueDomain&) const = default;
};

/// SELECT statement with `?` in literal positions, one domain per `?`.
struct QueryTemplate {
    std::string template_id;
    std::string sql_skeleton;
    std::vector<ValueDomain> value_domains;

    /// Throws InvalidParams if the placeholder count and domains disagree or
    /// the skeleton does not normalize.
    void validate() const;
    bool operator==(const QueryTemplate&) const = default;
};

/// Count of `?` outside quotes.
std::size_t placeholder_count(std::string_view sql);

/// `k` templates over letter-only identifiers. With overlap = 0 no two
/// templates share a term; with overlap > 0 that fraction of each
/// template's ten clause units is drawn from a small shared pool.
std::vector<QueryTemplate> synthetic_templates(std::size_t k, double overlap = 0.0, std::uint64_t seed = 1);

/// n split over k classes as evenly as possible, larger shares first.
std::vector<std::size_t> uniform_split(std::size_t n, std::size_t k);

/// counts[i] queries from templates[i], literals drawn from a seeded
/// mt19937_64, then shuffled. Ids are q00001, q00002, ... in output order and
/// qep_hash is the template id.
std::vector<Query> generate(const std::vector<QueryTemplate>& templates, const std::vector<std::size_t>& counts,
                            std::uint64_t seed = 42);

/// Shape of a generated query set.
struct SetShape {
    std::string name;
    std::size_t classes = 0;
    std::size_t queries = 0;
};

/// The three selection-query shapes: S1 (7, 235), S2 (14, 593), S3 (18, 1150).
const std::vector<SetShape>& standard_shapes();

std::vector<Query> generate_set(const SetShape& shape, double overlap = 0.0, std::uint64_t seed = 42);

/// Sum over clusters of the largest class share, divided by n. Every noise
/// point counts as misclassified. Throws InvalidParams when a label is missing.
double purity(const ClusterModel& model, const std::map<std::string, std::string>& truth);

/// query id -> qep hash for labeled queries.
std::map<std::string, std::string> labels_of(const std::vector<Query>& queries);

}  // namespace planrec
