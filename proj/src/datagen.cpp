#include "planrec/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "planrec/error.hpp"

namespace planrec {

namespace {

// Bijective base-16 over 'a'..'p'; 'z' never appears, so it can separate parts.
std::string code(std::size_t i) {
    std::string s;
    ++i;
    while (i > 0) {
        --i;
        s.insert(s.begin(), static_cast<char>('a' + i % 16));
        i /= 16;
    }
    return s;
}

std::uint64_t draw(std::mt19937_64& rng, std::uint64_t bound) { return rng() % bound; }

std::string literal(const ValueDomain& d, std::mt19937_64& rng) {
    if (!d.choices.empty()) {
        std::string out = "'";
        for (char c : d.choices[draw(rng, d.choices.size())]) {
            if (c == '\'') out += '\'';
            out += c;
        }
        return out + "'";
    }
    auto span = static_cast<std::uint64_t>(d.hi - d.lo) + 1;
    return std::to_string(d.lo + static_cast<std::int64_t>(draw(rng, span)));
}

std::string instantiate(const QueryTemplate& t, std::mt19937_64& rng) {
    std::string out;
    out.reserve(t.sql_skeleton.size() + 8 * t.value_domains.size());
    std::size_t next = 0;
    char quote = 0;
    for (char c : t.sql_skeleton) {
        if (quote) {
            if (c == quote) quote = 0;
            out += c;
        } else if (c == '\'' || c == '"') {
            quote = c;
            out += c;
        } else if (c == '?') {
            out += literal(t.value_domains[next++], rng);
        } else {
            out += c;
        }
    }
    return out;
}

}  // namespace

std::size_t placeholder_count(std::string_view sql) {
    std::size_t n = 0;
    char quote = 0;
    for (char c : sql) {
        if (quote) {
            if (c == quote) quote = 0;
        } else if (c == '\'' || c == '"') {
            quote = c;
        } else if (c == '?') {
            ++n;
        }
    }
    return n;
}

void QueryTemplate::validate() const {
    if (template_id.empty()) throw InvalidParams("template without an id");
    if (placeholder_count(sql_skeleton) != value_domains.size())
        throw InvalidParams("template '" + template_id + "' has " + std::to_string(placeholder_count(sql_skeleton)) +
                            " placeholders but " + std::to_string(value_domains.size()) + " value domains");
    for (const auto& d : value_domains)
        if (d.choices.empty() && d.hi < d.lo) throw InvalidParams("template '" + template_id + "' has an empty range");
    try {
        if (normalize(sql_skeleton).empty()) throw InvalidParams("template '" + template_id + "' yields no terms");
    } catch (const ParseError& e) {
        throw InvalidParams("template '" + template_id + "' does not parse: " + e.what());
    } catch (const UnsupportedStatement& e) {
        throw InvalidParams("template '" + template_id + "': " + e.what());
    }
}

std::vector<QueryTemplate> synthetic_templates(std::size_t k, double overlap, std::uint64_t seed) {
    if (k == 0) throw InvalidParams("need at least one template");
    if (!(overlap >= 0.0 && overlap <= 1.0)) throw InvalidParams("overlap must be in [0, 1]");

    // Ten clause units per template: SELECT, two FROM tables, six WHERE
    // columns, ORDER BY. Only the second table and the WHERE columns can be
    // drawn from the shared pool.
    constexpr std::size_t kUnits = 10;
    constexpr std::size_t kShareable = 7;
    constexpr std::size_t kPool = 3;
    const auto shared = std::min<std::size_t>(kShareable, static_cast<std::size_t>(std::lround(overlap * kUnits)));

    std::mt19937_64 rng(seed);
    std::vector<QueryTemplate> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const std::string c = code(i);
        std::vector<std::size_t> slots(kShareable);
        for (std::size_t s = 0; s < kShareable; ++s) slots[s] = s;
        for (std::size_t s = kShareable - 1; s > 0; --s) std::swap(slots[s], slots[draw(rng, s + 1)]);
        std::vector<std::string> names(kShareable);
        for (std::size_t s = 0; s < kShareable; ++s) names[s] = (s == 0 ? "tabz" : "colz") + c + "z" + code(s);
        for (std::size_t s = 0; s < shared; ++s) {
            std::size_t slot = slots[s];
            names[slot] = (slot == 0 ? "shrtabz" : "shrcolz") + code(draw(rng, kPool));
        }

        QueryTemplate t;
        t.template_id = "T" + std::to_string(i + 1);
        const std::string a = "colz" + c + "zsa", b = "colz" + c + "zsb";
        t.sql_skeleton = "SELECT " + a + ", " + b + " FROM tabz" + c + "zmain, " + names[0] + " WHERE " + names[1] +
                         " = ? AND " + names[2] + " > ? AND " + names[3] + " < ? AND " + names[4] + " = ? AND " +
                         names[5] + " >= ? AND " + names[6] + " <= ? ORDER BY " + a;
        t.value_domains = {{1, 100000, {}},
                           {0, 5000, {}},
                           {5000, 90000, {}},
                           {0, 0, {"Physics", "Comp. Sci.", "Biology", "Finance", "History", "Music"}},
                           {1990, 2020, {}},
                           {1, 999, {}}};
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<std::size_t> uniform_split(std::size_t n, std::size_t k) {
    if (k == 0) throw InvalidParams("cannot split over zero classes");
    std::vector<std::size_t> out(k, n / k);
    for (std::size_t i = 0; i < n % k; ++i) ++out[i];
    return out;
}

std::vector<Query> generate(const std::vector<QueryTemplate>& templates, const std::vector<std::size_t>& counts,
                            std::uint64_t seed) {
    if (templates.size() != counts.size())
        throw InvalidParams(std::to_string(templates.size()) + " templates but " + std::to_string(counts.size()) +
                            " counts");
    for (std::size_t i = 0; i < templates.size(); ++i) {
        templates[i].validate();
        if (counts[i] < 1) throw InvalidParams("template '" + templates[i].template_id + "' needs a count >= 1");
    }

    std::mt19937_64 rng(seed);
    std::vector<Query> out;
    for (std::size_t i = 0; i < templates.size(); ++i)
        for (std::size_t j = 0; j < counts[i]; ++j)
            out.push_back({"", instantiate(templates[i], rng), templates[i].template_id});
    for (std::size_t i = out.size(); i > 1; --i) std::swap(out[i - 1], out[draw(rng, i)]);
    for (std::size_t i = 0; i < out.size(); ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "q%05zu", i + 1);
        out[i].id = id;
    }
    return out;
}

const std::vector<SetShape>& standard_shapes() {
    static const std::vector<SetShape> shapes{{"S1", 7, 235}, {"S2", 14, 593}, {"S3", 18, 1150}};
    return shapes;
}

std::vector<Query> generate_set(const SetShape& shape, double overlap, std::uint64_t seed) {
    return generate(synthetic_templates(shape.classes, overlap, seed), uniform_split(shape.queries, shape.classes),
                    seed);
}

double purity(const ClusterModel& model, const std::map<std::string, std::string>& truth) {
    if (model.ids.empty()) throw EmptyInput();
    std::map<ClusterLabel, std::map<std::string, std::size_t>> table;
    for (std::size_t i = 0; i < model.ids.size(); ++i) {
        auto it = truth.find(model.ids[i]);
        if (it == truth.end()) throw InvalidParams("no ground-truth label for '" + model.ids[i] + "'");
        if (model.labels[i] != kNoise) ++table[model.labels[i]][it->second];
    }
    std::size_t hits = 0;
    for (const auto& [label, classes] : table) {
        std::size_t best = 0;
        for (const auto& [cls, n] : classes) best = std::max(best, n);
        hits += best;
    }
    return static_cast<double>(hits) / static_cast<double>(model.ids.size());
}

std::map<std::string, std::string> labels_of(const std::vector<Query>& queries) {
    std::map<std::string, std::string> out;
    for (const auto& q : queries)
        if (q.qep_hash) out.emplace(q.id, *q.qep_hash);
    return out;
}

}  // namespace planrec
