#include "planrec/persistence.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "planrec/codec.hpp"
#include "planrec/error.hpp"

namespace planrec {

namespace {

using json = nlohmann::json;

const char* const kVectorsFile = "vectors.tsv";
const char* const kMatrixFile = "matrix.tsv";
const char* const kClustersFile = "clusters.tsv";
const char* const kPlansFile = "plans.tsv";
const char* const kManifestFile = "manifest.json";

struct Line {
    std::size_t number;
    std::string_view text;
};

std::vector<Line> lines_of(std::string_view text) {
    std::vector<Line> out;
    std::size_t number = 0;
    while (!text.empty()) {
        ++number;
        auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) out.push_back({number, line});
        if (nl == std::string_view::npos) break;
        text.remove_prefix(nl + 1);
    }
    return out;
}

std::vector<std::string_view> fields(std::string_view line, std::size_t max_fields = 0) {
    std::vector<std::string_view> out;
    while (true) {
        if (max_fields && out.size() + 1 == max_fields) {
            out.push_back(line);
            break;
        }
        auto tab = line.find('\t');
        out.push_back(line.substr(0, tab));
        if (tab == std::string_view::npos) break;
        line.remove_prefix(tab + 1);
    }
    return out;
}

double parse_double(std::string_view s, const std::string& file, std::size_t line) {
    double v = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size())
        throw FormatError(file, line, "bad number '" + std::string(s) + "'");
    return v;
}

long long parse_int(std::string_view s, const std::string& file, std::size_t line) {
    long long v = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size())
        throw FormatError(file, line, "bad integer '" + std::string(s) + "'");
    return v;
}

void check_field(std::string_view value, const std::string& what) {
    if (value.find_first_of("\t\n\r") != std::string_view::npos)
        throw FormatError(what, 0, "value '" + std::string(value) + "' contains a tab or line break");
}

template <class T>
T json_get(const json& j, const char* key, const std::string& file) {
    if (!j.contains(key)) throw FormatError(file, 0, std::string("missing key '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw FormatError(file, 0, std::string("bad value for '") + key + "': " + e.what());
    }
}

json parse_json(std::string_view text, const std::string& file) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(file, 0, e.what());
    }
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_queries(const std::vector<Query>& queries) {
    std::string out;
    for (const auto& q : queries) {
        check_field(q.id, "query id");
        check_field(q.text, "query " + q.id);
        if (q.qep_hash) check_field(*q.qep_hash, "qep hash of " + q.id);
        if (q.qep_hash && *q.qep_hash == "-") throw FormatError("query " + q.id, 0, "'-' is not a valid qep hash");
        out += q.id + '\t' + q.qep_hash.value_or("-") + '\t' + q.text + '\n';
    }
    return out;
}

std::vector<Query> parse_queries(std::string_view text, const std::string& file) {
    std::vector<Query> out;
    for (const auto& line : lines_of(text)) {
        auto f = fields(line.text, 3);
        if (f.size() != 3 || f[0].empty()) throw FormatError(file, line.number, "expected id, qep hash and SQL");
        Query q{std::string(f[0]), std::string(f[2]), std::nullopt};
        if (f[1] != "-") q.qep_hash = std::string(f[1]);
        out.push_back(std::move(q));
    }
    return out;
}

std::string format_vectors(const std::vector<FeatureVector>& vectors) {
    std::string out;
    for (const auto& v : vectors) {
        check_field(v.query_id, "query id");
        for (const auto& [term, tf] : v.weights) {
            check_field(term, "term of " + v.query_id);
            out += v.query_id + '\t' + term + '\t' + format_double(tf) + '\n';
        }
    }
    return out;
}

std::vector<FeatureVector> parse_vectors(std::string_view text, const std::string& file) {
    std::map<std::string, FeatureVector> by_id;
    for (const auto& line : lines_of(text)) {
        auto f = fields(line.text);
        if (f.size() != 3) throw FormatError(file, line.number, "expected query id, term and weight");
        auto& v = by_id[std::string(f[0])];
        v.query_id = f[0];
        if (!v.weights.emplace(std::string(f[1]), parse_double(f[2], file, line.number)).second)
            throw FormatError(file, line.number, "duplicate term '" + std::string(f[1]) + "'");
    }
    std::vector<FeatureVector> out;
    out.reserve(by_id.size());
    for (auto& [id, v] : by_id) out.push_back(std::move(v));
    return out;
}

std::string format_matrix(const DistanceMatrix& m) {
    std::string out;
    for (std::size_t i = 0; i < m.ids.size(); ++i) {
        check_field(m.ids[i], "matrix id");
        if (i) out += '\t';
        out += m.ids[i];
    }
    out += '\n';
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) {
            if (j) out += '\t';
            out += format_double(m(i, j));
        }
        out += '\n';
    }
    return out;
}

DistanceMatrix parse_matrix(std::string_view text, const std::string& file) {
    DistanceMatrix m;
    auto nl = text.find('\n');
    if (nl == std::string_view::npos) throw FormatError(file, 1, "missing header line");
    auto header = text.substr(0, nl);
    if (!header.empty())
        for (auto id : fields(header)) m.ids.emplace_back(id);
    std::set<std::string> unique(m.ids.begin(), m.ids.end());
    if (unique.size() != m.ids.size()) throw FormatError(file, 1, "duplicate id in header");

    const auto n = static_cast<Eigen::Index>(m.ids.size());
    m.d.resize(n, n);
    auto rows = lines_of(text.substr(nl + 1));
    if (rows.size() != m.ids.size())
        throw FormatError(file, 0, "expected " + std::to_string(n) + " rows, found " + std::to_string(rows.size()));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        auto f = fields(row.text);
        if (static_cast<Eigen::Index>(f.size()) != n)
            throw FormatError(file, row.number + 1, "expected " + std::to_string(n) + " values");
        for (Eigen::Index j = 0; j < n; ++j)
            m.d(i, j) = parse_double(f[static_cast<std::size_t>(j)], file, row.number + 1);
    }
    return m;
}

std::string format_clusters(const ClusterModel& model, std::string_view noise_label) {
    std::string out;
    for (std::size_t i = 0; i < model.ids.size(); ++i) {
        check_field(model.ids[i], "cluster id");
        out += model.ids[i] + '\t';
        out += model.labels[i] == kNoise ? std::string(noise_label) : std::to_string(model.labels[i]);
        out += '\n';
    }
    return out;
}

ClusterModel parse_clusters(std::string_view text, const std::string& file) {
    ClusterModel model;
    for (const auto& line : lines_of(text)) {
        auto f = fields(line.text);
        if (f.size() != 2) throw FormatError(file, line.number, "expected query id and label");
        model.ids.emplace_back(f[0]);
        if (f[1] == "noise") {
            model.labels.push_back(kNoise);
        } else {
            auto label = parse_int(f[1], file, line.number);
            if (label < kNoise) throw FormatError(file, line.number, "negative cluster label");
            model.labels.push_back(static_cast<ClusterLabel>(label));
        }
    }
    return model;
}

std::string format_plans(const std::map<std::string, std::string>& plans) {
    std::string out;
    for (const auto& [id, hash] : plans) {
        check_field(id, "plan id");
        check_field(hash, "plan of " + id);
        out += id + '\t' + hash + '\n';
    }
    return out;
}

std::map<std::string, std::string> parse_plans(std::string_view text, const std::string& file) {
    std::map<std::string, std::string> out;
    for (const auto& line : lines_of(text)) {
        auto f = fields(line.text);
        if (f.size() != 2) throw FormatError(file, line.number, "expected query id and qep hash");
        if (!out.emplace(std::string(f[0]), std::string(f[1])).second)
            throw FormatError(file, line.number, "duplicate id '" + std::string(f[0]) + "'");
    }
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(path.string(), 0, "cannot open for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(path.string(), 0, "cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw FormatError(path.string(), 0, "write failed");
}

std::string checksum(std::string_view bytes) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx",
                  static_cast<unsigned long long>(codec::stable_hash(bytes, 0)));
    return buf;
}

void save_workspace(const std::filesystem::path& dir, const PlanStore& store, const mr::EngineConfig& engine,
                    int version) {
    if (version != 1 && version != kFormatVersion) throw VersionMismatch(version, kFormatVersion);
    std::filesystem::create_directories(dir);
    const std::map<std::string, std::string> files{
        {kVectorsFile, format_vectors(store.vectors)},
        {kMatrixFile, format_matrix(store.matrix)},
        {kClustersFile, format_clusters(store.model, version == 1 ? "-1" : "noise")},
        {kPlansFile, format_plans(store.plans)},
    };
    json manifest;
    manifest["format_version"] = version;
    manifest["params"]["eps"] = store.model.params.eps;
    manifest["params"][version == 1 ? "minpts" : "min_pts"] = store.model.params.min_pts;
    manifest["engine"] = {{"executor", mr::to_string(engine.executor)},
                          {"workers", engine.workers},
                          {"shuffle", mr::to_string(engine.shuffle)}};
    for (const auto& [name, content] : files) {
        write_file(dir / name, content);
        manifest["files"][name] = checksum(content);
    }
    write_file(dir / kManifestFile, manifest.dump(2) + "\n");
}

Workspace load_workspace(const std::filesystem::path& dir) {
    const std::string manifest_path = (dir / kManifestFile).string();
    auto manifest = parse_json(read_file(dir / kManifestFile), manifest_path);
    if (!manifest.is_object()) throw FormatError(manifest_path, 0, "manifest is not an object");

    Workspace ws;
    ws.format_version = json_get<int>(manifest, "format_version", manifest_path);
    if (ws.format_version < 1 || ws.format_version > kFormatVersion)
        throw VersionMismatch(ws.format_version, kFormatVersion);

    auto params = json_get<json>(manifest, "params", manifest_path);
    ClusteringParams p;
    p.eps = json_get<double>(params, "eps", manifest_path);
    p.min_pts = json_get<std::size_t>(params, ws.format_version == 1 ? "minpts" : "min_pts", manifest_path);
    try {
        p.validate();
    } catch (const InvalidParams& e) {
        throw FormatError(manifest_path, 0, e.what());
    }

    if (manifest.contains("engine")) {
        auto engine = manifest.at("engine");
        try {
            ws.engine.executor = mr::parse_executor(json_get<std::string>(engine, "executor", manifest_path));
            ws.engine.workers = json_get<std::size_t>(engine, "workers", manifest_path);
            ws.engine.shuffle = mr::parse_shuffle(json_get<std::string>(engine, "shuffle", manifest_path));
            ws.engine.validate();
        } catch (const InvalidParams& e) {
            throw FormatError(manifest_path, 0, e.what());
        }
    }

    auto files = json_get<json>(manifest, "files", manifest_path);
    auto load = [&](const char* name) {
        if (!files.contains(name)) throw FormatError(manifest_path, 0, std::string("no entry for ") + name);
        auto path = dir / name;
        if (!std::filesystem::exists(path)) throw ChecksumMismatch(path.string());
        auto content = read_file(path);
        if (checksum(content) != json_get<std::string>(files, name, manifest_path))
            throw ChecksumMismatch(path.string());
        return content;
    };

    auto& store = ws.store;
    store.vectors = parse_vectors(load(kVectorsFile), (dir / kVectorsFile).string());
    store.matrix = parse_matrix(load(kMatrixFile), (dir / kMatrixFile).string());
    store.model = parse_clusters(load(kClustersFile), (dir / kClustersFile).string());
    store.model.params = p;
    store.plans = parse_plans(load(kPlansFile), (dir / kPlansFile).string());

    std::vector<std::string> ids;
    for (const auto& v : store.vectors) ids.push_back(v.query_id);
    if (ids != store.matrix.ids || ids != store.model.ids)
        throw FormatError(dir.string(), 0, "vectors, matrix and clusters disagree on the query ids");
    store.cluster_plan = derive_cluster_plans(store.model, store.plans);
    return ws;
}

int migrate_workspace(const std::filesystem::path& dir) {
    auto ws = load_workspace(dir);
    if (ws.format_version != kFormatVersion) save_workspace(dir, ws.store, ws.engine, kFormatVersion);
    return ws.format_version;
}

TemplateManifest parse_template_manifest(std::string_view text, const std::string& file) {
    auto j = parse_json(text, file);
    TemplateManifest m;
    if (j.contains("seed")) m.seed = json_get<std::uint64_t>(j, "seed", file);
    if (j.contains("synthetic")) {
        auto s = j.at("synthetic");
        auto classes = json_get<std::size_t>(s, "classes", file);
        auto queries = json_get<std::size_t>(s, "queries", file);
        double overlap = s.contains("overlap") ? json_get<double>(s, "overlap", file) : 0.0;
        m.templates = synthetic_templates(classes, overlap, m.seed);
        m.counts = uniform_split(queries, classes);
        return m;
    }
    for (const auto& t : json_get<json>(j, "templates", file)) {
        QueryTemplate qt;
        qt.template_id = json_get<std::string>(t, "id", file);
        qt.sql_skeleton = json_get<std::string>(t, "sql", file);
        if (t.contains("domains")) {
            for (const auto& d : t.at("domains")) {
                ValueDomain vd;
                if (d.contains("choices")) {
                    vd.choices = json_get<std::vector<std::string>>(d, "choices", file);
                } else {
                    auto range = json_get<std::vector<std::int64_t>>(d, "range", file);
                    if (range.size() != 2) throw FormatError(file, 0, "range needs [lo, hi]");
                    vd.lo = range[0];
                    vd.hi = range[1];
                }
                qt.value_domains.push_back(std::move(vd));
            }
        }
        m.templates.push_back(std::move(qt));
    }
    if (j.contains("counts")) {
        m.counts = json_get<std::vector<std::size_t>>(j, "counts", file);
    } else {
        m.counts.assign(m.templates.size(), 1);
    }
    return m;
}

BenchManifest parse_bench_manifest(std::string_view text, const std::string& file) {
    auto j = parse_json(text, file);
    BenchManifest m;
    if (j.contains("seed")) m.seed = json_get<std::uint64_t>(j, "seed", file);
    for (const auto& s : json_get<json>(j, "sets", file)) {
        m.shapes.push_back({json_get<std::string>(s, "name", file), json_get<std::size_t>(s, "classes", file),
                            json_get<std::size_t>(s, "queries", file)});
        m.overlaps.push_back(s.contains("overlap") ? json_get<double>(s, "overlap", file) : 0.0);
    }
    if (j.contains("workers")) m.config.worker_counts = json_get<std::vector<std::size_t>>(j, "workers", file);
    if (j.contains("modes")) {
        m.config.modes.clear();
        for (const auto& mode : json_get<std::vector<std::string>>(j, "modes", file))
            m.config.modes.push_back(mr::parse_shuffle(mode));
    }
    if (j.contains("repeats")) m.config.repeats = json_get<std::size_t>(j, "repeats", file);
    if (j.contains("per_phase")) m.config.per_phase = json_get<bool>(j, "per_phase", file);
    if (j.contains("eps")) m.config.params.eps = json_get<double>(j, "eps", file);
    if (j.contains("min_pts")) m.config.params.min_pts = json_get<std::size_t>(j, "min_pts", file);
    return m;
}

}  // namespace planrec
