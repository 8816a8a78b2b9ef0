#include "planrec/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <sstream>

#include "planrec/error.hpp"
#include "planrec/similarity.hpp"
#include "planrec/tf_features.hpp"

namespace planrec {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

void BenchConfig::validate() const {
    if (worker_counts.empty()) throw InvalidParams("no worker counts given");
    for (auto w : worker_counts)
        if (w == 0) throw InvalidParams("worker count must be at least 1");
    if (modes.empty()) throw InvalidParams("no shuffle modes given");
    if (repeats == 0) throw InvalidParams("repeats must be at least 1");
    params.validate();
}

std::string BenchReport::csv_header() { return "dataset,n,workers,mode,phase,seconds,speedup_vs_1worker"; }

std::string BenchReport::csv() const {
    std::ostringstream out;
    out << csv_header() << '\n';
    for (const auto& r : rows) {
        out << r.dataset << ',' << r.n << ',' << r.workers << ',' << mr::to_string(r.mode) << ',' << r.phase << ','
            << fixed(r.seconds, 6) << ',';
        if (r.speedup_vs_1worker) out << fixed(*r.speedup_vs_1worker, 4);
        out << '\n';
    }
    return out.str();
}

const BenchRow* BenchReport::find(const std::string& dataset, std::size_t workers, mr::Shuffle mode,
                                  const std::string& phase) const {
    for (const auto& r : rows)
        if (r.dataset == dataset && r.workers == workers && r.mode == mode && r.phase == phase) return &r;
    return nullptr;
}

std::optional<double> BenchReport::average_mode_speedup() const {
    double sum = 0;
    std::size_t n = 0;
    for (const auto& r : rows) {
        if (r.phase != "total" || r.mode != mr::Shuffle::InMemory) continue;
        if (const auto* disk = find(r.dataset, r.workers, mr::Shuffle::DiskSpill); disk && r.seconds > 0) {
            sum += disk->seconds / r.seconds;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

PipelineTiming time_pipeline(const std::vector<Query>& queries, const ClusteringParams& params,
                             const mr::EngineConfig& cfg, ClusterModel* model) {
    PipelineTiming t;
    auto start = Clock::now();
    auto features = featurize(queries, cfg);
    t.featurize = since(start);

    auto mid = Clock::now();
    std::vector<std::string> ids;
    ids.reserve(features.vectors.size());
    for (const auto& v : features.vectors) ids.push_back(v.query_id);
    auto matrix = to_distance_matrix(pairwise_job(features.vectors, cfg), ids);
    t.similarity = since(mid);

    auto last = Clock::now();
    auto m = cluster(matrix, params);
    t.cluster = since(last);
    t.total = since(start);
    if (model) *model = std::move(m);
    return t;
}

double median(std::vector<double> values) {
    if (values.empty()) throw EmptyInput();
    std::sort(values.begin(), values.end());
    std::size_t mid = values.size() / 2;
    return values.size() % 2 ? values[mid] : (values[mid - 1] + values[mid]) / 2.0;
}

BenchReport run_benchmark(const std::vector<QuerySet>& sets, const BenchConfig& config) {
    config.validate();
    BenchReport report;
    static const char* const kPhases[] = {"featurize", "similarity", "cluster", "total"};

    for (const auto& set : sets) {
        for (auto mode : config.modes) {
            for (auto workers : config.worker_counts) {
                auto cfg = mr::EngineConfig::parallel(workers, mode);
                cfg.spill_dir = config.spill_dir;
                std::map<std::string, std::vector<double>> samples;
                try {
                    for (std::size_t r = 0; r < config.repeats; ++r) {
                        auto t = time_pipeline(set.queries, config.params, cfg);
                        samples["featurize"].push_back(t.featurize);
                        samples["similarity"].push_back(t.similarity);
                        samples["cluster"].push_back(t.cluster);
                        samples["total"].push_back(t.total);
                    }
                } catch (const std::exception& e) {
                    report.errors.push_back({set.name, workers, mode, e.what()});
                    continue;
                }
                for (const char* phase : kPhases) {
                    if (!config.per_phase && std::string_view(phase) != "total") continue;
                    report.rows.push_back({set.name, set.queries.size(), workers, mode, phase,
                                           median(samples[phase]), std::nullopt});
                }
            }
        }
    }
    for (auto& r : report.rows) {
        const auto* base = report.find(r.dataset, 1, r.mode, r.phase);
        if (base && r.seconds > 0) r.speedup_vs_1worker = base->seconds / r.seconds;
    }
    return report;
}

}  // namespace planrec
