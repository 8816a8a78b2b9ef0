#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "planrec/dbscan.hpp"
#include "planrec/mr_engine.hpp"
#include "planrec/query_text.hpp"

namespace planrec {

struct QuerySet {
    std::string name;
    std::vector<Query> queries;
};

struct BenchConfig {
    std::vector<std::size_t> worker_counts{1};
    std::vector<mr::Shuffle> modes{mr::Shuffle::InMemory};
    std::size_t repeats = 5;
    bool per_phase = false;  // add featurize/similarity/cluster rows next to total
    ClusteringParams params{0.5, 2};
    std::filesystem::path spill_dir = mr::default_spill_dir();

    void validate() const;
};

struct BenchRow {
    std::string dataset;
    std::size_t n = 0;
    std::size_t workers = 1;
    mr::Shuffle mode = mr::Shuffle::InMemory;
    std::string phase;
    double seconds = 0;                       // median over repeats
    std::optional<double> speedup_vs_1worker;  // time(1 worker) / time(this row)
};

struct BenchError {
    std::string dataset;
    std::size_t workers = 1;
    mr::Shuffle mode = mr::Shuffle::InMemory;
    std::string message;
};

struct BenchReport {
    std::vector<BenchRow> rows;
    std::vector<BenchError> errors;

    static std::string csv_header();
    std::string csv() const;
    const BenchRow* find(const std::string& dataset, std::size_t workers, mr::Shuffle mode,
                         const std::string& phase = "total") const;
    /// Mean of DiskSpill/InMemory total time over every (dataset, workers)
    /// cell measured in both modes.
    std::optional<double> average_mode_speedup() const;
};

/// Wall-clock seconds of one end-to-end run.
struct PipelineTiming {
    double featurize = 0;
    double similarity = 0;
    double cluster = 0;
    double total = 0;
};

/// featurize -> pairwise_job -> to_distance_matrix -> cluster, timed.
PipelineTiming time_pipeline(const std::vector<Query>& queries, const ClusteringParams& params,
                             const mr::EngineConfig& cfg, ClusterModel* model = nullptr);

double median(std::vector<double> values);

/// Every (set, mode, workers) cell runs `repeats` times on the parallel
/// executor, strictly one after another. A cell that throws is recorded in
/// `errors` and the remaining cells still run.
BenchReport run_benchmark(const std::vector<QuerySet>& sets, const BenchConfig& config);

}  // namespace planrec
