#pragma once

// Random SELECT statements for property tests. Structure and literal values
// come from separate generators, so two statements built with the same
// structure seed differ only in their literals.

#include <random>
#include <string>
#include <vector>

namespace fuzz {

class SqlGenerator {
public:
    SqlGenerator(std::uint64_t structure_seed, std::uint64_t literal_seed)
        : s_(structure_seed), l_(literal_seed) {}

    std::string statement(int depth = 0) {
        std::string sql = "SELECT ";
        if (pick(4) == 0) sql += "DISTINCT ";
        std::vector<std::string> aliases;
        std::string tables = from_list(depth, aliases);
        sql += select_list(aliases) + " FROM " + tables;
        if (pick(3) != 0) sql += " WHERE " + condition(aliases, depth, 0);
        if (pick(3) == 0) {
            sql += " GROUP BY " + column(aliases);
            if (pick(2) == 0) sql += " HAVING COUNT(" + column(aliases) + ") > " + number();
        }
        if (pick(3) == 0) sql += " ORDER BY " + column(aliases) + (pick(2) ? " DESC" : "");
        if (pick(4) == 0) sql += " LIMIT " + integer();
        if (depth == 0 && pick(6) == 0) sql += " UNION " + statement(1);
        return sql;
    }

private:
    std::size_t pick(std::size_t n) { return s_() % n; }

    std::string word() {
        static const char* const kWords[] = {"name", "dept", "salary", "title", "course", "room", "year",
                                             "grade", "budget", "building", "credits", "semester"};
        return kWords[pick(std::size(kWords))];
    }
    std::string table() {
        static const char* const kTables[] = {"instructor", "student", "takes", "section", "department", "advisor"};
        return kTables[pick(std::size(kTables))];
    }

    std::string column(const std::vector<std::string>& aliases) {
        if (!aliases.empty() && pick(2) == 0) return aliases[pick(aliases.size())] + "." + word();
        return word();
    }

    std::string from_list(int depth, std::vector<std::string>& aliases) {
        std::string out;
        std::size_t n = 1 + pick(2);
        for (std::size_t i = 0; i < n; ++i) {
            bool join = i > 0 && pick(2) == 0;
            if (i) out += join ? " JOIN " : ", ";
            std::string t = (pick(4) == 0 ? "univ." : "") + table();
            if (pick(2)) {
                std::string alias = std::string(1, static_cast<char>('p' + aliases.size())) + (depth ? "x" : "");
                out += t + (pick(2) ? " AS " : " ") + alias;
                aliases.push_back(alias);
            } else {
                out += t;
            }
            if (join) out += " ON " + column(aliases) + " = " + column(aliases);
        }
        return out;
    }

    std::string select_list(const std::vector<std::string>& aliases) {
        std::string out;
        std::size_t n = 1 + pick(3);
        for (std::size_t i = 0; i < n; ++i) {
            if (i) out += ", ";
            switch (pick(4)) {
                case 0: out += "COUNT(" + column(aliases) + ")"; break;
                case 1: out += column(aliases) + " AS out" + std::string(1, static_cast<char>('a' + i)); break;
                default: out += column(aliases);
            }
        }
        return out;
    }

    std::string condition(const std::vector<std::string>& aliases, int depth, int nesting) {
        std::string lhs = column(aliases);
        std::string pred;
        switch (pick(nesting < 2 ? 8 : 6)) {
            case 0: pred = lhs + " = " + string_literal(); break;
            case 1: pred = lhs + " IN (" + number() + ", " + number() + ")"; break;
            case 2: pred = lhs + " BETWEEN " + number() + " AND " + number(); break;
            case 3: pred = lhs + " IS NOT NULL"; break;
            case 4: pred = lhs + " LIKE " + string_literal(); break;
            case 5: pred = lhs + (pick(2) ? " > " : " <= ") + number(); break;
            case 6: pred = "(" + condition(aliases, depth, nesting + 1) + " OR " + condition(aliases, depth, nesting + 1) + ")"; break;
            default:
                pred = depth < 1 ? lhs + " IN (" + statement(depth + 1) + ")" : lhs + " <> " + number();
        }
        if (nesting == 0 && pick(2) == 0) pred += " AND " + condition(aliases, depth, nesting + 1);
        return pred;
    }

    std::string integer() { return std::to_string(1 + l_() % 5000); }
    std::string number() {
        switch (l_() % 4) {
            case 0: return std::to_string(l_() % 100000);
            case 1: return std::to_string(l_() % 1000) + "." + std::to_string(l_() % 100);
            case 2: return std::to_string(1 + l_() % 99) + ",000";
            default: return "-" + std::to_string(l_() % 500);
        }
    }
    std::string string_literal() {
        static const char* const kValues[] = {"Comp. Sci.", "Physics", "O''Brien", "Fall", "2009", "x%"};
        return std::string("'") + kValues[l_() % std::size(kValues)] + "'";
    }

    std::mt19937_64 s_;
    std::mt19937_64 l_;
};

}  // namespace fuzz
