#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "planrec/bench.hpp"
#include "planrec/datagen.hpp"
#include "planrec/dbscan.hpp"
#include "planrec/mr_engine.hpp"
#include "planrec/recommender.hpp"
#include "planrec/similarity.hpp"
#include "planrec/tf_features.hpp"

// Text artifact formats. Every file is UTF-8, one record per line, fields
// separated by tabs, floats printed with 17 significant digits so a read
// reproduces the written double exactly.
//
//   queries   id  qep_hash|-  sql
//   vectors   query_id  term  tf
//   matrix    header line of ids, then one row of distances per id
//   clusters  query_id  label|noise
//   plans     query_id  qep_hash
//
// A workspace directory holds vectors.tsv, matrix.tsv, clusters.tsv,
// plans.tsv and manifest.json (format version, clustering params, engine
// config, checksum per file).

namespace planrec {

inline constexpr int kFormatVersion = 2;

std::string format_double(double v);

std::string format_queries(const std::vector<Query>& queries);
std::vector<Query> parse_queries(std::string_view text, const std::string& file = "queries");

std::string format_vectors(const std::vector<FeatureVector>& vectors);
std::vector<FeatureVector> parse_vectors(std::string_view text, const std::string& file = "vectors");

std::string format_matrix(const DistanceMatrix& m);
DistanceMatrix parse_matrix(std::string_view text, const std::string& file = "matrix");

/// `noise_label` is "noise" for the current format and "-1" for version 1.
std::string format_clusters(const ClusterModel& model, std::string_view noise_label = "noise");
/// Reads ids and labels; accepts "noise" and "-1". Params are left default.
ClusterModel parse_clusters(std::string_view text, const std::string& file = "clusters");

std::string format_plans(const std::map<std::string, std::string>& plans);
std::map<std::string, std::string> parse_plans(std::string_view text, const std::string& file = "plans");

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// FNV-1a 64 of the bytes, as "fnv1a64:<16 hex digits>".
std::string checksum(std::string_view bytes);

struct Workspace {
    PlanStore store;
    mr::EngineConfig engine;
    int format_version = kFormatVersion;  // version found on disk
};

/// Writes every artifact plus the manifest. `version` 1 writes the legacy
/// layout (noise as -1, "minpts" key) and exists for migration testing.
void save_workspace(const std::filesystem::path& dir, const PlanStore& store, const mr::EngineConfig& engine = {},
                    int version = kFormatVersion);

/// Verifies checksums and reads every artifact. Version 1 workspaces are
/// migrated in memory. Throws ChecksumMismatch, VersionMismatch, FormatError.
Workspace load_workspace(const std::filesystem::path& dir);

/// Rewrites an older workspace in the current format; returns the version
/// that was found.
int migrate_workspace(const std::filesystem::path& dir);

/// Template manifest: {"templates": [{"id", "sql", "domains": [{"range": [lo, hi]} | {"choices": [...]}]}],
/// "counts": [...]} or {"synthetic": {"classes", "queries", "overlap"}}, plus optional "seed".
struct TemplateManifest {
    std::vector<QueryTemplate> templates;
    std::vector<std::size_t> counts;
    std::uint64_t seed = 42;
};

TemplateManifest parse_template_manifest(std::string_view text, const std::string& file = "templates");

/// Bench manifest: {"sets": [{"name", "classes", "queries", "overlap"?}], "workers": [...],
/// "modes": ["memory", "disk"], "repeats", "eps", "min_pts", "per_phase", "seed"}.
struct BenchManifest {
    std::vector<SetShape> shapes;
    std::vector<double> overlaps;  // per shape
    std::uint64_t seed = 42;
    BenchConfig config;
};

BenchManifest parse_bench_manifest(std::string_view text, const std::string& file = "bench");

}  // namespace planrec
