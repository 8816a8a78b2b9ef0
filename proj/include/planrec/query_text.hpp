#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace planrec {

struct Query {
    std::string id;
    std::string text;
    std::optional<std::string> qep_hash;

    bool operator==(const Query&) const = default;
};

enum class Clause { Select, From, Where, GroupBy, OrderBy, Having, Other };

/// Keyword used as the term prefix: "SELECT", "GROUP BY", "OTHER", ...
std::string_view clause_keyword(Clause clause);

/// One normalized clause fragment. `payload` holds one or more atoms joined
/// by ", " (top-level commas only; function arguments keep their own commas).
struct ClauseUnit {
    Clause clause;
    std::string payload;

    bool operator==(const ClauseUnit&) const = default;
};

struct TokenizedQuery {
    std::string id;
    std::vector<std::string> terms;

    bool operator==(const TokenizedQuery&) const = default;
};

/// Parse a SELECT statement and strip it down to clause-qualified column
/// references. Literals, bind parameters, aliases, namespace qualifiers,
/// AS/ASC/INNER and similar sugar are removed; every AND/OR operand of a
/// WHERE or HAVING condition becomes its own unit. Subqueries are flattened
/// in place, in source order.
///
/// Throws ParseError on malformed input, UnsupportedStatement for anything
/// that is not a SELECT.
std::vector<ClauseUnit> normalize(std::string_view raw);

/// Render units back to SQL text that normalizes to the same unit list.
/// Throws std::invalid_argument for unit sequences normalize cannot produce.
std::string render(const std::vector<ClauseUnit>& units);

/// Expand units into "<CLAUSE> <atom>" terms. Throws EmptyQuery when there is
/// nothing to emit.
TokenizedQuery tokenize(std::string id, const std::vector<ClauseUnit>& units);

/// Convenience for tokenize(id, normalize(text)).
TokenizedQuery tokenize_query(const Query& query);

/// Split a payload on commas that are not nested inside parentheses.
std::vector<std::string> split_atoms(std::string_view payload);

}  // namespace planrec
