#include "planrec/query_text.hpp"

#include "planrec/error.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <utility>

namespace planrec {

std::string_view clause_keyword(Clause clause) {
    switch (clause) {
        case Clause::Select: return "SELECT";
        case Clause::From: return "FROM";
        case Clause::Where: return "WHERE";
        case Clause::GroupBy: return "GROUP BY";
        case Clause::OrderBy: return "ORDER BY";
        case Clause::Having: return "HAVING";
        case Clause::Other: return "OTHER";
    }
    return "OTHER";
}

namespace {

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

enum class Tok { Ident, QuotedIdent, Number, String, Param, Symbol, End };

struct Token {
    Tok kind;
    std::string text;   // identifiers: as written; symbols: the operator
    std::string upper;  // identifiers only
    std::size_t pos;
};

std::string to_upper(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool is_ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

const std::set<std::string, std::less<>>& reserved_words() {
    static const std::set<std::string, std::less<>> words = {
        "ALL",    "AND",   "AS",     "ASC",    "BETWEEN", "BY",      "CASE",      "CROSS",
        "DESC",   "DISTINCT", "ELSE", "END",   "ESCAPE",  "EXCEPT",  "EXISTS",    "FALSE",
        "FETCH",  "FROM",  "FULL",   "GROUP",  "HAVING",  "ILIKE",   "IN",        "INNER",
        "INTERSECT", "IS", "JOIN",   "LEFT",   "LIKE",    "LIMIT",   "NATURAL",   "NOT",
        "NULL",   "OFFSET", "ON",    "OR",     "ORDER",   "OUTER",   "OVER",      "RIGHT",
        "SELECT", "THEN",  "TRUE",   "UNION",  "USING",   "WHEN",    "WHERE",     "WINDOW",
    };
    return words;
}

bool is_reserved(std::string_view upper) { return reserved_words().count(upper) > 0; }

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_space_and_comments();
            if (i_ >= src_.size()) break;
            out.push_back(next());
        }
        out.push_back({Tok::End, "", "", src_.size()});
        return out;
    }

private:
    void skip_space_and_comments() {
        while (i_ < src_.size()) {
            char c = src_[i_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++i_;
            } else if (c == '-' && peek(1) == '-') {
                while (i_ < src_.size() && src_[i_] != '\n') ++i_;
            } else if (c == '/' && peek(1) == '*') {
                std::size_t start = i_;
                auto end = src_.find("*/", i_ + 2);
                if (end == std::string_view::npos) throw ParseError(start, "unterminated comment");
                i_ = end + 2;
            } else {
                break;
            }
        }
    }

    char peek(std::size_t ahead) const {
        return i_ + ahead < src_.size() ? src_[i_ + ahead] : '\0';
    }

    Token next() {
        std::size_t start = i_;
        char c = src_[i_];
        auto uc = static_cast<unsigned char>(c);

        if (is_ident_start(uc)) {
            while (i_ < src_.size() && is_ident_char(static_cast<unsigned char>(src_[i_]))) ++i_;
            std::string word(src_.substr(start, i_ - start));
            // N'..', E'..', X'..', B'..' prefixed literals
            if (word.size() == 1 && i_ < src_.size() && src_[i_] == '\'' &&
                std::string_view("NnEeXxBb").find(word[0]) != std::string_view::npos) {
                scan_string(start);
                return {Tok::String, std::string(src_.substr(start, i_ - start)), "", start};
            }
            return {Tok::Ident, word, to_upper(word), start};
        }
        if (is_digit(c) || (c == '.' && is_digit(peek(1)))) return scan_number(start);
        if (c == '\'') {
            scan_string(start);
            return {Tok::String, std::string(src_.substr(start, i_ - start)), "", start};
        }
        if (c == '"' || c == '`') return scan_quoted_ident(start, c, c);
        if (c == '[') return scan_quoted_ident(start, '[', ']');
        if (c == '?') {
            ++i_;
            return {Tok::Param, "?", "", start};
        }
        if ((c == ':' && is_ident_start(static_cast<unsigned char>(peek(1)))) ||
            (c == '@' && is_ident_start(static_cast<unsigned char>(peek(1)))) ||
            (c == '$' && is_digit(peek(1)))) {
            ++i_;
            while (i_ < src_.size() && is_ident_char(static_cast<unsigned char>(src_[i_]))) ++i_;
            return {Tok::Param, std::string(src_.substr(start, i_ - start)), "", start};
        }
        static const char* two_char[] = {"<>", "!=", "<=", ">=", "||", "::"};
        for (const char* op : two_char) {
            if (c == op[0] && peek(1) == op[1]) {
                i_ += 2;
                return {Tok::Symbol, op, "", start};
            }
        }
        if (std::string_view(",().*+-/%=<>;&|^~").find(c) != std::string_view::npos) {
            ++i_;
            return {Tok::Symbol, std::string(1, c), "", start};
        }
        throw ParseError(start, std::string("unexpected character '") + c + "'");
    }

    // Digits with optional thousands groups ("90,000"), fraction and exponent.
    Token scan_number(std::size_t start) {
        std::size_t run = 0;
        while (i_ < src_.size() && is_digit(src_[i_])) {
            ++i_;
            ++run;
        }
        if (run >= 1 && run <= 3) {
            while (peek(0) == ',' && is_digit(peek(1)) && is_digit(peek(2)) && is_digit(peek(3)) &&
                   !is_digit(peek(4)) && !is_ident_char(static_cast<unsigned char>(peek(4)))) {
                i_ += 4;
            }
        }
        if (peek(0) == '.' && is_digit(peek(1))) {
            ++i_;
            while (i_ < src_.size() && is_digit(src_[i_])) ++i_;
        } else if (peek(0) == '.' && run > 0 && !is_ident_start(static_cast<unsigned char>(peek(1)))) {
            ++i_;  // "5."
        }
        if ((peek(0) == 'e' || peek(0) == 'E') &&
            (is_digit(peek(1)) || ((peek(1) == '+' || peek(1) == '-') && is_digit(peek(2))))) {
            i_ += 2;
            while (i_ < src_.size() && is_digit(src_[i_])) ++i_;
        }
        if (i_ < src_.size() && is_ident_char(static_cast<unsigned char>(src_[i_])))
            throw ParseError(i_, "malformed numeric literal");
        return {Tok::Number, std::string(src_.substr(start, i_ - start)), "", start};
    }

    void scan_string(std::size_t start) {
        i_ = src_.find('\'', start) + 1;
        while (true) {
            if (i_ >= src_.size()) throw ParseError(start, "unterminated string literal");
            if (src_[i_] == '\'') {
                if (peek(1) == '\'') {
                    i_ += 2;
                    continue;
                }
                ++i_;
                return;
            }
            ++i_;
        }
    }

    Token scan_quoted_ident(std::size_t start, char open, char close) {
        (void)open;
        ++i_;
        std::string name;
        while (true) {
            if (i_ >= src_.size()) throw ParseError(start, "unterminated quoted identifier");
            if (src_[i_] == close) {
                if (close != ']' && peek(1) == close) {
                    name += close;
                    i_ += 2;
                    continue;
                }
                ++i_;
                break;
            }
            name += src_[i_++];
        }
        if (name.empty()) throw ParseError(start, "empty quoted identifier");
        return {Tok::QuotedIdent, name, "", start};
    }

    std::string_view src_;
    std::size_t i_ = 0;
};

// Canonical identifier spelling: lower case, double-quoted when it would not
// lex back as a plain identifier.
std::string canonical_ident(std::string_view name) {
    std::string lower = to_lower(name);
    bool plain = !lower.empty() && (std::isalpha(static_cast<unsigned char>(lower[0])) || lower[0] == '_');
    for (char c : lower) {
        auto uc = static_cast<unsigned char>(c);
        if (!(std::isalnum(uc) || c == '_' || c == '$')) plain = false;
    }
    if (plain && !is_reserved(to_upper(lower))) return lower;
    std::string quoted = "\"";
    for (char c : lower) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    return quoted + "\"";
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

/// Column references and function atoms of one expression, plus the units of
/// any subqueries it contains (emitted after the owning clause unit).
struct Fragment {
    std::vector<std::string> atoms;
    std::vector<ClauseUnit> nested;

    bool empty() const { return atoms.empty() && nested.empty(); }
    void absorb(Fragment&& other) {
        atoms.insert(atoms.end(), std::make_move_iterator(other.atoms.begin()),
                     std::make_move_iterator(other.atoms.end()));
        nested.insert(nested.end(), std::make_move_iterator(other.nested.begin()),
                      std::make_move_iterator(other.nested.end()));
    }
};

/// Boolean leaves. AND/OR/NOT keep leaves apart; any other operator merges.
using Leaves = std::vector<Fragment>;

Fragment merge(Leaves&& leaves) {
    Fragment out;
    for (auto& leaf : leaves) out.absorb(std::move(leaf));
    return out;
}

Leaves single(Fragment&& f) {
    Leaves out;
    out.push_back(std::move(f));
    return out;
}

using AliasMap = std::map<std::string, std::vector<std::string>>;

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    std::vector<ClauseUnit> statement() {
        const Token& first = cur();
        if (first.kind == Tok::End) throw ParseError(first.pos, "empty statement");
        if (first.kind == Tok::Ident && first.upper != "SELECT") {
            if (!is_reserved(first.upper)) throw UnsupportedStatement(first.upper);
        }
        if (!is_kw("SELECT")) throw ParseError(first.pos, "expected SELECT");
        auto units = query_expr();
        accept_symbol(";");
        if (cur().kind != Tok::End) throw ParseError(cur().pos, "unexpected '" + cur().text + "'");
        return units;
    }

private:
    // --- token helpers ---------------------------------------------------
    const Token& cur() const { return toks_[i_]; }
    const Token& ahead(std::size_t n) const { return toks_[std::min(i_ + n, toks_.size() - 1)]; }
    void advance() {
        if (i_ + 1 < toks_.size()) ++i_;
    }

    bool is_kw(std::string_view kw) const { return cur().kind == Tok::Ident && cur().upper == kw; }
    bool is_kw_at(std::size_t n, std::string_view kw) const {
        return ahead(n).kind == Tok::Ident && ahead(n).upper == kw;
    }
    bool accept_kw(std::string_view kw) {
        if (!is_kw(kw)) return false;
        advance();
        return true;
    }
    void expect_kw(std::string_view kw) {
        if (!accept_kw(kw)) throw ParseError(cur().pos, "expected " + std::string(kw));
    }
    bool is_symbol(std::string_view s) const { return cur().kind == Tok::Symbol && cur().text == s; }
    bool accept_symbol(std::string_view s) {
        if (!is_symbol(s)) return false;
        advance();
        return true;
    }
    void expect_symbol(std::string_view s) {
        if (!accept_symbol(s)) throw ParseError(cur().pos, "expected '" + std::string(s) + "'");
    }

    bool at_name() const {
        return cur().kind == Tok::QuotedIdent || (cur().kind == Tok::Ident && !is_reserved(cur().upper));
    }
    std::string name() {
        if (!at_name()) throw ParseError(cur().pos, "expected identifier");
        std::string n = cur().text;
        advance();
        return n;
    }

    // --- query structure -------------------------------------------------
    std::vector<ClauseUnit> query_expr() {
        auto units = select_core();
        while (is_kw("UNION") || is_kw("INTERSECT") || is_kw("EXCEPT")) {
            std::string op = cur().upper;
            advance();
            if (accept_kw("ALL")) op += " ALL";
            else accept_kw("DISTINCT");
            units.push_back({Clause::Other, op});
            auto rhs = select_core();
            units.insert(units.end(), rhs.begin(), rhs.end());
        }
        return units;
    }

    std::vector<ClauseUnit> select_core() {
        std::vector<ClauseUnit> out;
        auto saved_scope = alias_scope_;
        alias_scope_ = nullptr;
        expect_kw("SELECT");
        if (accept_kw("DISTINCT")) out.push_back({Clause::Other, "DISTINCT"});
        else accept_kw("ALL");

        AliasMap aliases;
        Fragment select_list;
        do {
            select_list.absorb(select_item(aliases));
        } while (accept_symbol(","));
        emit(out, Clause::Select, std::move(select_list));

        if (accept_kw("FROM")) from_list(out);

        if (accept_kw("WHERE")) emit_conditions(out, Clause::Where, or_expr());

        alias_scope_ = &aliases;
        if (is_kw("GROUP")) {
            advance();
            expect_kw("BY");
            Fragment items;
            do {
                items.absorb(merge(or_expr()));
            } while (accept_symbol(","));
            emit(out, Clause::GroupBy, std::move(items));
        }
        if (accept_kw("HAVING")) emit_conditions(out, Clause::Having, or_expr());
        if (is_kw("ORDER")) {
            advance();
            expect_kw("BY");
            Fragment items;
            do {
                items.absorb(order_item());
            } while (accept_symbol(","));
            emit(out, Clause::OrderBy, std::move(items));
        }
        alias_scope_ = saved_scope;

        if (accept_kw("LIMIT")) {
            limit_value();
            out.push_back({Clause::Other, "LIMIT"});
            if (accept_symbol(",")) limit_value();
        }
        if (accept_kw("OFFSET")) {
            limit_value();
            if (accept_kw("ROW") || accept_kw("ROWS")) {}
            out.push_back({Clause::Other, "OFFSET"});
        }
        if (is_kw("FETCH") || is_kw("WINDOW"))
            throw ParseError(cur().pos, cur().upper + " is not supported");
        return out;
    }

    void limit_value() {
        if (accept_kw("ALL")) return;
        if (cur().kind == Tok::Number || cur().kind == Tok::Param) {
            advance();
            return;
        }
        throw ParseError(cur().pos, "expected a row count");
    }

    Fragment select_item(AliasMap& aliases) {
        Fragment item;
        if (accept_symbol("*")) {
            item.atoms.push_back("*");
        } else if ((cur().kind == Tok::Ident || cur().kind == Tok::QuotedIdent) &&
                   ahead(1).kind == Tok::Symbol && ahead(1).text == "." &&
                   ahead(2).kind == Tok::Symbol && ahead(2).text == "*") {
            advance();
            advance();
            advance();
            item.atoms.push_back("*");
        } else {
            item = merge(or_expr());
        }
        std::optional<std::string> alias;
        if (accept_kw("AS")) {
            if (cur().kind == Tok::String) {
                alias = cur().text.substr(1, cur().text.size() - 2);
                advance();
            } else {
                alias = name();
            }
        } else if (at_name()) {
            alias = name();
        }
        if (alias) aliases[to_lower(*alias)] = item.atoms;
        return item;
    }

    Fragment order_item() {
        Fragment item = merge(or_expr());
        std::string suffix;
        if (accept_kw("DESC")) suffix = " DESC";
        else accept_kw("ASC");
        if (accept_kw("NULLS")) {
            if (accept_kw("FIRST")) suffix += " NULLS FIRST";
            else if (accept_kw("LAST")) suffix += " NULLS LAST";
            else throw ParseError(cur().pos, "expected FIRST or LAST");
        }
        for (auto& atom : item.atoms) atom += suffix;
        return item;
    }

    // FROM list: comma-separated table references, each optionally followed
    // by joins. Every operand becomes its own FROM unit; outer/natural join
    // kinds are kept as OTHER units ahead of the operand; ON/USING
    // predicates become WHERE units.
    void from_list(std::vector<ClauseUnit>& out) {
        do {
            table_ref(out);
            while (true) {
                std::string kind;
                bool natural = accept_kw("NATURAL");
                if (accept_kw("INNER") || accept_kw("CROSS")) {
                } else if (is_kw("LEFT") || is_kw("RIGHT") || is_kw("FULL")) {
                    kind = cur().upper;
                    advance();
                    accept_kw("OUTER");
                }
                if (!is_kw("JOIN")) {
                    if (natural || !kind.empty()) throw ParseError(cur().pos, "expected JOIN");
                    break;
                }
                advance();
                std::string other = natural ? (kind.empty() ? "NATURAL JOIN" : "NATURAL " + kind + " JOIN")
                                            : (kind.empty() ? "" : kind + " JOIN");
                if (!other.empty()) out.push_back({Clause::Other, other});
                table_ref(out);
                if (accept_kw("ON")) {
                    emit_conditions(out, Clause::Where, or_expr());
                } else if (accept_kw("USING")) {
                    expect_symbol("(");
                    do {
                        out.push_back({Clause::Where, canonical_ident(name())});
                    } while (accept_symbol(","));
                    expect_symbol(")");
                }
            }
        } while (accept_symbol(","));
    }

    void table_ref(std::vector<ClauseUnit>& out) {
        if (accept_symbol("(")) {
            if (is_kw("SELECT")) {
                auto sub = query_expr();
                out.insert(out.end(), sub.begin(), sub.end());
            } else {
                from_list(out);
            }
            expect_symbol(")");
        } else {
            std::string last = name();
            while (accept_symbol(".")) last = name();
            std::string table = canonical_ident(last);
            if (accept_symbol("(")) {
                Fragment args = call_args();
                out.push_back({Clause::From, table + "(" + join(args.atoms, ", ") + ")"});
                out.insert(out.end(), args.nested.begin(), args.nested.end());
            } else {
                out.push_back({Clause::From, table});
            }
        }
        if (accept_kw("AS")) {
            name();
        } else if (at_name()) {
            name();
        }
    }

    static void emit(std::vector<ClauseUnit>& out, Clause clause, Fragment&& f) {
        if (!f.atoms.empty()) out.push_back({clause, join(f.atoms, ", ")});
        out.insert(out.end(), std::make_move_iterator(f.nested.begin()),
                   std::make_move_iterator(f.nested.end()));
    }

    static void emit_conditions(std::vector<ClauseUnit>& out, Clause clause, Leaves&& leaves) {
        for (auto& leaf : leaves) emit(out, clause, std::move(leaf));
    }

    // --- expressions -----------------------------------------------------
    Leaves or_expr() {
        Leaves leaves = and_expr();
        while (accept_kw("OR")) {
            Leaves rhs = and_expr();
            leaves.insert(leaves.end(), std::make_move_iterator(rhs.begin()),
                          std::make_move_iterator(rhs.end()));
        }
        return leaves;
    }

    Leaves and_expr() {
        Leaves leaves = not_expr();
        while (accept_kw("AND")) {
            Leaves rhs = not_expr();
            leaves.insert(leaves.end(), std::make_move_iterator(rhs.begin()),
                          std::make_move_iterator(rhs.end()));
        }
        return leaves;
    }

    Leaves not_expr() {
        if (accept_kw("NOT")) return not_expr();
        return predicate();
    }

    Leaves predicate() {
        Leaves lhs = additive();
        static const std::set<std::string, std::less<>> comparisons = {"=", "<>", "!=", "<", ">", "<=", ">="};
        while (true) {
            if (cur().kind == Tok::Symbol && comparisons.count(cur().text)) {
                advance();
                Fragment f = merge(std::move(lhs));
                if (accept_kw("ANY") || accept_kw("ALL") || accept_kw("SOME")) {
                    f.absorb(parenthesized_subquery());
                } else {
                    f.absorb(merge(additive()));
                }
                lhs = single(std::move(f));
                continue;
            }
            if (is_kw("IS")) {
                advance();
                accept_kw("NOT");
                if (accept_kw("DISTINCT")) {
                    expect_kw("FROM");
                    Fragment f = merge(std::move(lhs));
                    f.absorb(merge(additive()));
                    lhs = single(std::move(f));
                } else if (accept_kw("NULL") || accept_kw("TRUE") || accept_kw("FALSE") ||
                           accept_kw("UNKNOWN")) {
                    lhs = single(merge(std::move(lhs)));
                } else {
                    throw ParseError(cur().pos, "expected NULL, TRUE or FALSE after IS");
                }
                continue;
            }
            std::size_t mark = i_;
            bool negated = accept_kw("NOT");
            if (accept_kw("IN")) {
                Fragment f = merge(std::move(lhs));
                expect_symbol("(");
                if (is_kw("SELECT")) {
                    f.nested = concat(std::move(f.nested), query_expr());
                } else {
                    do {
                        f.absorb(merge(or_expr()));
                    } while (accept_symbol(","));
                }
                expect_symbol(")");
                lhs = single(std::move(f));
                continue;
            }
            if (accept_kw("BETWEEN")) {
                Fragment f = merge(std::move(lhs));
                accept_kw("SYMMETRIC");
                f.absorb(merge(additive()));
                expect_kw("AND");
                f.absorb(merge(additive()));
                lhs = single(std::move(f));
                continue;
            }
            if (accept_kw("LIKE") || accept_kw("ILIKE")) {
                Fragment f = merge(std::move(lhs));
                f.absorb(merge(additive()));
                if (accept_kw("ESCAPE")) f.absorb(merge(additive()));
                lhs = single(std::move(f));
                continue;
            }
            if (negated) i_ = mark;
            break;
        }
        return lhs;
    }

    static std::vector<ClauseUnit> concat(std::vector<ClauseUnit> a, std::vector<ClauseUnit> b) {
        a.insert(a.end(), std::make_move_iterator(b.begin()), std::make_move_iterator(b.end()));
        return a;
    }

    Fragment parenthesized_subquery() {
        expect_symbol("(");
        if (!is_kw("SELECT")) throw ParseError(cur().pos, "expected subquery");
        Fragment f;
        f.nested = query_expr();
        expect_symbol(")");
        return f;
    }

    bool at_binary_operator() const {
        if (cur().kind != Tok::Symbol) return false;
        static const std::set<std::string, std::less<>> ops = {"+", "-", "*", "/", "%", "||", "&", "|", "^"};
        return ops.count(cur().text) > 0;
    }

    Leaves additive() {
        Leaves lhs = unary();
        while (at_binary_operator()) {
            advance();
            Fragment f = merge(std::move(lhs));
            f.absorb(merge(unary()));
            lhs = single(std::move(f));
        }
        return lhs;
    }

    Leaves unary() {
        if (accept_symbol("-") || accept_symbol("+") || accept_symbol("~")) return unary();
        Leaves v = primary();
        while (accept_symbol("::")) type_name();
        return v;
    }

    void type_name() {
        name();
        while (at_name()) name();  // "double precision", "character varying"
        if (accept_symbol("(")) {
            do {
                if (cur().kind != Tok::Number) throw ParseError(cur().pos, "expected type modifier");
                advance();
            } while (accept_symbol(","));
            expect_symbol(")");
        }
    }

    Leaves primary() {
        const Token& t = cur();
        switch (t.kind) {
            case Tok::Number:
            case Tok::String:
            case Tok::Param:
                advance();
                return {};
            case Tok::Symbol:
                if (t.text == "(") return parenthesized();
                throw ParseError(t.pos, "unexpected '" + t.text + "'");
            case Tok::End:
                throw ParseError(t.pos, "unexpected end of statement");
            case Tok::QuotedIdent:
                return single(reference());
            case Tok::Ident:
                break;
        }
        const std::string& kw = t.upper;
        if (kw == "NULL" || kw == "TRUE" || kw == "FALSE") {
            advance();
            return {};
        }
        if ((kw == "DATE" || kw == "TIME" || kw == "TIMESTAMP") && ahead(1).kind == Tok::String) {
            advance();
            advance();
            return {};
        }
        if (kw == "INTERVAL" && ahead(1).kind == Tok::String) {
            advance();
            advance();
            static const std::set<std::string, std::less<>> units = {
                "YEAR", "MONTH", "DAY", "HOUR", "MINUTE", "SECOND", "WEEK"};
            if (cur().kind == Tok::Ident && units.count(cur().upper)) advance();
            return {};
        }
        if (kw == "EXISTS") {
            advance();
            return single(parenthesized_subquery());
        }
        if (kw == "CASE") return single(case_expr());
        if (kw == "CAST" && ahead(1).kind == Tok::Symbol && ahead(1).text == "(") {
            advance();
            advance();
            Fragment f = merge(or_expr());
            expect_kw("AS");
            type_name();
            expect_symbol(")");
            return single(std::move(f));
        }
        if (is_reserved(kw) && !((kw == "LEFT" || kw == "RIGHT") && ahead(1).text == "("))
            throw ParseError(t.pos, "unexpected keyword " + kw);
        return single(reference());
    }

    Leaves parenthesized() {
        expect_symbol("(");
        if (is_kw("SELECT")) {
            Fragment f;
            f.nested = query_expr();
            expect_symbol(")");
            return single(std::move(f));
        }
        Leaves inner = or_expr();
        if (accept_symbol(",")) {  // row constructor
            Fragment f = merge(std::move(inner));
            do {
                f.absorb(merge(or_expr()));
            } while (accept_symbol(","));
            inner = single(std::move(f));
        }
        expect_symbol(")");
        return inner;
    }

    Fragment case_expr() {
        expect_kw("CASE");
        Fragment f;
        if (!is_kw("WHEN")) f.absorb(merge(or_expr()));
        if (!is_kw("WHEN")) throw ParseError(cur().pos, "expected WHEN");
        while (accept_kw("WHEN")) {
            f.absorb(merge(or_expr()));
            expect_kw("THEN");
            f.absorb(merge(or_expr()));
        }
        if (accept_kw("ELSE")) f.absorb(merge(or_expr()));
        expect_kw("END");
        return f;
    }

    // Column reference or function call. Qualifiers are dropped.
    Fragment reference() {
        std::string last = cur().kind == Tok::QuotedIdent ? cur().text : cur().text;
        bool single_part = true;
        advance();
        while (accept_symbol(".")) {
            single_part = false;
            if (accept_symbol("*")) return Fragment{{"*"}, {}};
            last = name();
        }
        if (accept_symbol("(")) {
            Fragment args = call_args();
            if (is_kw("OVER")) throw ParseError(cur().pos, "window functions are not supported");
            Fragment f;
            f.atoms.push_back(canonical_ident(last) + "(" + join(args.atoms, ", ") + ")");
            f.nested = std::move(args.nested);
            return f;
        }
        std::string col = canonical_ident(last);
        if (single_part && alias_scope_) {
            auto it = alias_scope_->find(to_lower(last));
            if (it != alias_scope_->end()) return Fragment{it->second, {}};
        }
        return Fragment{{col}, {}};
    }

    // Arguments after "(" up to and including ")".
    Fragment call_args() {
        Fragment args;
        if (accept_symbol(")")) return args;
        if (!accept_kw("DISTINCT")) accept_kw("ALL");
        if (accept_symbol("*")) {
            args.atoms.push_back("*");
        } else {
            do {
                args.absorb(merge(or_expr()));
            } while (accept_symbol(","));
        }
        expect_symbol(")");
        return args;
    }

    std::vector<Token> toks_;
    std::size_t i_ = 0;
    const AliasMap* alias_scope_ = nullptr;
};

// ---------------------------------------------------------------------------
// Renderer
// ---------------------------------------------------------------------------

enum Stage { kEmpty, kDistinct, kSelect, kFrom, kWhere, kGroup, kHaving, kOrder, kLimit, kOffset };

struct Builder;

struct Piece {
    std::string text;
    std::unique_ptr<Builder> sub;
};

struct FromItem {
    std::string connector;  // "," for the first item too; ignored there
    Piece operand;
    std::vector<Piece> on;
};

struct Core {
    Stage stage = kEmpty;
    bool distinct = false;
    std::vector<Piece> select;
    std::vector<FromItem> from;
    std::optional<std::string> pending_join;
    std::vector<Piece> where, group, having, order;
    bool limit = false, offset = false;
};

struct Builder {
    std::vector<std::pair<std::string, Core>> cores;  // set-op, core

    Builder() { cores.emplace_back("", Core{}); }
    Core& core() { return cores.back().second; }
    std::string sql() const;
};

std::string piece_sql(const Piece& p, std::string_view prefix = "") {
    if (!p.sub) return p.text;
    return std::string(prefix) + "(" + p.sub->sql() + ")";
}

std::string pieces_sql(const std::vector<Piece>& ps, std::string_view sep, std::string_view prefix = "") {
    std::string out;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        if (i) out += sep;
        out += piece_sql(ps[i], prefix);
    }
    return out;
}

std::string core_sql(const Core& c) {
    std::string out = "SELECT ";
    if (c.distinct) out += "DISTINCT ";
    out += c.select.empty() ? "1" : pieces_sql(c.select, ", ");
    if (!c.from.empty() || c.pending_join) {
        out += " FROM ";
        for (std::size_t i = 0; i < c.from.size(); ++i) {
            const auto& item = c.from[i];
            if (i) out += item.connector == "," ? ", " : " " + item.connector + " ";
            out += piece_sql(item.operand);
            if (!item.on.empty()) out += " ON " + pieces_sql(item.on, " AND ", "EXISTS ");
        }
        if (c.pending_join) out += " " + *c.pending_join + " (SELECT 1)";
    }
    if (!c.where.empty()) out += " WHERE " + pieces_sql(c.where, " AND ", "EXISTS ");
    if (!c.group.empty()) out += " GROUP BY " + pieces_sql(c.group, ", ");
    if (!c.having.empty()) out += " HAVING " + pieces_sql(c.having, " AND ", "EXISTS ");
    if (!c.order.empty()) out += " ORDER BY " + pieces_sql(c.order, ", ");
    if (c.limit) out += " LIMIT 1";
    if (c.offset) out += " OFFSET 1";
    return out;
}

std::string Builder::sql() const {
    std::string out;
    for (const auto& [op, c] : cores) {
        if (!op.empty()) out += " " + op + " ";
        out += core_sql(c);
    }
    return out;
}

bool is_set_op(std::string_view p) {
    return p == "UNION" || p == "UNION ALL" || p == "INTERSECT" || p == "INTERSECT ALL" ||
           p == "EXCEPT" || p == "EXCEPT ALL";
}

bool is_join_kind(std::string_view p) {
    return p.size() > 5 && p.substr(p.size() - 5) == " JOIN";
}

std::string predicate_text(const std::string& payload) { return join(split_atoms(payload), " + "); }

bool can_append(const Core& c, const ClauseUnit& u) {
    switch (u.clause) {
        case Clause::Select: return c.stage <= kDistinct && c.select.empty();
        case Clause::From: return c.stage <= kFrom;
        case Clause::Where: return c.stage <= kWhere;
        case Clause::GroupBy: return c.stage < kGroup;
        case Clause::Having: return c.stage <= kHaving;
        case Clause::OrderBy: return c.stage < kOrder;
        case Clause::Other:
            if (u.payload == "DISTINCT") return c.stage == kEmpty;
            if (u.payload == "LIMIT") return c.stage < kLimit;
            if (u.payload == "OFFSET") return c.stage < kOffset;
            if (is_set_op(u.payload)) return true;
            if (is_join_kind(u.payload)) return c.stage <= kFrom && !c.pending_join;
            throw std::invalid_argument("unknown OTHER unit: " + u.payload);
    }
    return false;
}

void flush_pending_join(Core& c) {
    if (!c.pending_join) return;
    c.from.push_back({*c.pending_join, Piece{"(SELECT 1)", nullptr}, {}});
    c.pending_join.reset();
}

void append(Builder& b, const ClauseUnit& u) {
    Core& c = b.core();
    switch (u.clause) {
        case Clause::Select:
            c.select.push_back({u.payload, nullptr});
            c.stage = kSelect;
            return;
        case Clause::From: {
            std::string connector = c.pending_join.value_or(",");
            c.pending_join.reset();
            c.from.push_back({connector, Piece{u.payload, nullptr}, {}});
            c.stage = kFrom;
            return;
        }
        case Clause::Where:
            flush_pending_join(c);
            if (c.stage == kFrom && !c.from.empty() && c.from.back().connector != ",") {
                c.from.back().on.push_back({predicate_text(u.payload), nullptr});
            } else {
                c.where.push_back({predicate_text(u.payload), nullptr});
                c.stage = kWhere;
            }
            return;
        case Clause::GroupBy:
            c.group.push_back({u.payload, nullptr});
            c.stage = kGroup;
            return;
        case Clause::Having:
            c.having.push_back({predicate_text(u.payload), nullptr});
            c.stage = kHaving;
            return;
        case Clause::OrderBy:
            c.order.push_back({u.payload, nullptr});
            c.stage = kOrder;
            return;
        case Clause::Other:
            if (u.payload == "DISTINCT") {
                c.distinct = true;
                c.stage = kDistinct;
            } else if (u.payload == "LIMIT") {
                flush_pending_join(c);
                c.limit = true;
                c.stage = kLimit;
            } else if (u.payload == "OFFSET") {
                flush_pending_join(c);
                c.offset = true;
                c.stage = kOffset;
            } else if (is_set_op(u.payload)) {
                flush_pending_join(c);
                b.cores.emplace_back(u.payload, Core{});
            } else {
                if (c.from.empty()) c.from.push_back({",", Piece{"(SELECT 1)", nullptr}, {}});
                c.pending_join = u.payload;
                c.stage = kFrom;
            }
            return;
    }
}

bool can_nest(const Core& c) {
    return c.stage != kEmpty && c.stage != kLimit && c.stage != kOffset;
}

/// Opens a subquery in the core's current clause and returns its builder.
Builder* nest(Core& c) {
    auto sub = std::make_unique<Builder>();
    Builder* raw = sub.get();
    switch (c.stage) {
        case kDistinct:
        case kSelect:
            c.select.push_back({"", std::move(sub)});
            c.stage = kSelect;
            break;
        case kFrom: {
            std::string connector = c.pending_join.value_or(",");
            c.pending_join.reset();
            c.from.push_back({connector, Piece{"", std::move(sub)}, {}});
            break;
        }
        case kWhere: c.where.push_back({"", std::move(sub)}); break;
        case kGroup: c.group.push_back({"", std::move(sub)}); break;
        case kHaving: c.having.push_back({"", std::move(sub)}); break;
        case kOrder: c.order.push_back({"", std::move(sub)}); break;
        default: throw std::logic_error("cannot nest here");
    }
    return raw;
}

}  // namespace

std::vector<ClauseUnit> normalize(std::string_view raw) {
    Parser parser(Lexer(raw).run());
    return parser.statement();
}

std::string render(const std::vector<ClauseUnit>& units) {
    Builder root;
    std::vector<Builder*> stack{&root};
    for (const auto& u : units) {
        if (u.payload.empty()) throw std::invalid_argument("empty clause payload");
        if (can_append(stack.back()->core(), u)) {
            append(*stack.back(), u);
            continue;
        }
        bool placed = false;
        for (std::size_t k = stack.size() - 1; k-- > 0;) {
            if (can_append(stack[k]->core(), u)) {
                stack.resize(k + 1);
                append(*stack.back(), u);
                placed = true;
                break;
            }
        }
        if (placed) continue;
        while (!can_nest(stack.back()->core())) {
            if (stack.size() == 1) throw std::invalid_argument("unit sequence has no SQL rendering");
            stack.pop_back();
        }
        Builder* sub = nest(stack.back()->core());
        stack.push_back(sub);
        append(*sub, u);
    }
    return root.sql();
}

std::vector<std::string> split_atoms(std::string_view payload) {
    std::vector<std::string> atoms;
    int depth = 0;
    bool quoted = false;
    std::string current;
    auto flush = [&] {
        auto b = current.find_first_not_of(' ');
        auto e = current.find_last_not_of(' ');
        if (b != std::string::npos) atoms.push_back(current.substr(b, e - b + 1));
        current.clear();
    };
    for (char c : payload) {
        if (c == '"') quoted = !quoted;
        if (!quoted) {
            if (c == '(') ++depth;
            if (c == ')') --depth;
            if (c == ',' && depth == 0) {
                flush();
                continue;
            }
        }
        current += c;
    }
    flush();
    return atoms;
}

TokenizedQuery tokenize(std::string id, const std::vector<ClauseUnit>& units) {
    TokenizedQuery out{std::move(id), {}};
    for (const auto& unit : units) {
        std::string prefix(clause_keyword(unit.clause));
        for (auto& atom : split_atoms(unit.payload)) out.terms.push_back(prefix + " " + atom);
    }
    if (out.terms.empty()) throw EmptyQuery(out.id);
    return out;
}

TokenizedQuery tokenize_query(const Query& query) { return tokenize(query.id, normalize(query.text)); }

}  // namespace planrec
