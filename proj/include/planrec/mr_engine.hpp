#pragma once

// Embedded MapReduce engine.
//
// A job is a pure map function (record -> key/value pairs) and a pure reduce
// function (key, sorted values -> key/value pairs). Output is always
// canonical: groups are formed by exact key equality, values are sorted before
// reduce, and the final output is sorted by (key, value). Every executor,
// worker count, partition count and shuffle mode therefore yields the same
// output for the same (input, job).
//
// Executors:
//   Sequential  single-threaded reference path: map everything, sort, group,
//               reduce, sort.
//   Parallel    map tasks over input splits, hash partitioning, per-partition
//               sort, reduce distributed over key groups, all on a worker pool.
//
// Shuffle:
//   InMemory    intermediate pairs stay resident.
//   DiskSpill   every map task writes length-prefixed records to one temp file
//               per partition and reducers read them back; job chains also
//               materialize each inter-job boundary.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "planrec/codec.hpp"
#include "planrec/error.hpp"

namespace planrec::mr {

template <class K, class V>
struct KeyValue {
    K key;
    V value;

    friend bool operator==(const KeyValue& a, const KeyValue& b) {
        return a.key == b.key && a.value == b.value;
    }
    friend bool operator<(const KeyValue& a, const KeyValue& b) {
        if (a.key < b.key) return true;
        if (b.key < a.key) return false;
        return a.value < b.value;
    }
};

template <class In, class K, class V, class OK = K, class OV = V>
struct JobSpec {
    using input_type = In;
    using key_type = K;
    using value_type = V;
    using output_type = KeyValue<OK, OV>;

    std::string name;
    std::function<std::vector<KeyValue<K, V>>(const In&)> map;
    std::function<std::vector<KeyValue<OK, OV>>(const K&, std::span<const V>)> reduce;
    std::size_t partitions = 1;
};

enum class Executor { Sequential, Parallel };
enum class Shuffle { InMemory, DiskSpill };

/// Spill root: $PLANREC_TMPDIR if set, else the system temp directory.
std::filesystem::path default_spill_dir();

struct EngineConfig {
    Executor executor = Executor::Sequential;
    std::size_t workers = 1;
    Shuffle shuffle = Shuffle::InMemory;
    std::filesystem::path spill_dir = default_spill_dir();

    static EngineConfig sequential(Shuffle shuffle = Shuffle::InMemory) {
        EngineConfig c;
        c.shuffle = shuffle;
        return c;
    }
    static EngineConfig parallel(std::size_t workers, Shuffle shuffle = Shuffle::InMemory) {
        EngineConfig c;
        c.executor = Executor::Parallel;
        c.workers = workers;
        c.shuffle = shuffle;
        return c;
    }

    /// Throws InvalidParams when workers == 0.
    void validate() const;
};

std::string to_string(Executor e);
std::string to_string(Shuffle s);
Shuffle parse_shuffle(std::string_view text);    // "memory" | "disk"
Executor parse_executor(std::string_view text);  // "sequential" | "parallel"

struct TimingReport {
    std::string executor;
    std::size_t workers = 1;
    std::string shuffle;
    std::size_t jobs = 0;
    double map_seconds = 0;
    double shuffle_seconds = 0;
    double reduce_seconds = 0;
    double spill_io_seconds = 0;
    double total_seconds = 0;
    std::uint64_t bytes_spilled = 0;
    std::uint64_t records_in = 0;
    std::uint64_t records_intermediate = 0;
    std::uint64_t records_out = 0;

    void describe(const EngineConfig& cfg);
    static std::string csv_header();
    std::string csv_row() const;
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

inline constexpr std::uint64_t kPartitionSeed = 0x9e3779b97f4a7c15ULL;

/// Owns a fresh directory under `root`; removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::filesystem::path& root);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// Writes `records` (already encoded) to `file`, each with a u32 length prefix.
/// Returns bytes written. Throws SpillIOError.
std::uint64_t write_records(const std::filesystem::path& file, const std::vector<std::string>& records);

/// Reads back a file written by write_records.
std::vector<std::string> read_records(const std::filesystem::path& file);

/// Runs fn(0..n_tasks-1) on up to `workers` threads. Every task runs even if
/// some fail; the exception of the lowest failing task index is rethrown.
void run_tasks(std::size_t n_tasks, std::size_t workers, const std::function<void(std::size_t)>& fn);

std::string describe_current_exception();

template <class K>
std::size_t partition_of(const K& key, std::size_t partitions) {
    if (partitions <= 1) return 0;
    std::string bytes;
    codec::encode(key, bytes);
    return static_cast<std::size_t>(codec::stable_hash(bytes, kPartitionSeed) % partitions);
}

template <class K, class V>
std::string encode_kv(const KeyValue<K, V>& kv) {
    std::string bytes;
    codec::encode(kv.key, bytes);
    codec::encode(kv.value, bytes);
    return bytes;
}

template <class K, class V>
KeyValue<K, V> decode_kv(std::string_view bytes) {
    K k = codec::decode<K>(bytes);
    V v = codec::decode<V>(bytes);
    if (!bytes.empty()) throw SpillIOError("trailing bytes in spill record");
    return {std::move(k), std::move(v)};
}

template <class K, class V>
std::uint64_t spill(const std::filesystem::path& file, const std::vector<KeyValue<K, V>>& pairs) {
    std::vector<std::string> records;
    records.reserve(pairs.size());
    for (const auto& kv : pairs) records.push_back(encode_kv(kv));
    return write_records(file, records);
}

template <class K, class V>
void unspill(const std::filesystem::path& file, std::vector<KeyValue<K, V>>& out) {
    for (const auto& rec : read_records(file)) out.push_back(decode_kv<K, V>(rec));
}

/// Calls reduce on one key group, wrapping user exceptions.
template <class Job, class K, class V>
void reduce_group(const Job& job, std::size_t partition, KeyValue<K, V>* begin, KeyValue<K, V>* end,
                  std::vector<typename Job::output_type>& out) {
    std::vector<V> values;
    values.reserve(static_cast<std::size_t>(end - begin));
    for (auto* it = begin; it != end; ++it) values.push_back(std::move(it->value));
    try {
        auto emitted = job.reduce(begin->key, std::span<const V>(values));
        out.insert(out.end(), std::make_move_iterator(emitted.begin()),
                   std::make_move_iterator(emitted.end()));
    } catch (...) {
        throw TaskError("reduce", partition, describe_current_exception());
    }
}

template <class Job, class In>
std::vector<KeyValue<typename Job::key_type, typename Job::value_type>> map_record(
    const Job& job, std::size_t task, const In& record) {
    try {
        return job.map(record);
    } catch (...) {
        throw TaskError("map", task, describe_current_exception());
    }
}

template <class In, class K, class V, class OK, class OV>
std::vector<KeyValue<OK, OV>> run_sequential(const std::vector<In>& input,
                                             const JobSpec<In, K, V, OK, OV>& job,
                                             const EngineConfig& cfg, TimingReport& report) {
    auto t0 = Clock::now();
    std::vector<KeyValue<K, V>> inter;
    for (const auto& record : input) {
        auto pairs = map_record(job, 0, record);
        inter.insert(inter.end(), std::make_move_iterator(pairs.begin()), std::make_move_iterator(pairs.end()));
    }
    report.map_seconds += seconds_since(t0);
    report.records_intermediate += inter.size();

    auto t1 = Clock::now();
    if (cfg.shuffle == Shuffle::DiskSpill && !inter.empty()) {
        TempDir dir(cfg.spill_dir);
        std::vector<std::vector<KeyValue<K, V>>> parts(job.partitions);
        for (auto& kv : inter) parts[partition_of(kv.key, job.partitions)].push_back(std::move(kv));
        inter.clear();
        auto io = Clock::now();
        for (std::size_t p = 0; p < parts.size(); ++p) {
            report.bytes_spilled += spill(dir.path() / ("part-" + std::to_string(p)), parts[p]);
            parts[p].clear();
        }
        for (std::size_t p = 0; p < parts.size(); ++p) unspill(dir.path() / ("part-" + std::to_string(p)), inter);
        report.spill_io_seconds += seconds_since(io);
    }
    std::sort(inter.begin(), inter.end());
    report.shuffle_seconds += seconds_since(t1);

    auto t2 = Clock::now();
    std::vector<KeyValue<OK, OV>> out;
    for (std::size_t b = 0; b < inter.size();) {
        std::size_t e = b + 1;
        while (e < inter.size() && inter[e].key == inter[b].key) ++e;
        reduce_group(job, partition_of(inter[b].key, job.partitions), inter.data() + b, inter.data() + e, out);
        b = e;
    }
    std::sort(out.begin(), out.end());
    report.reduce_seconds += seconds_since(t2);
    return out;
}

template <class In, class K, class V, class OK, class OV>
std::vector<KeyValue<OK, OV>> run_parallel(const std::vector<In>& input,
                                           const JobSpec<In, K, V, OK, OV>& job,
                                           const EngineConfig& cfg, TimingReport& report) {
    using Pair = KeyValue<K, V>;
    const std::size_t workers = cfg.workers;
    const std::size_t parts = job.partitions;
    const std::size_t n_map = std::max<std::size_t>(1, std::min(input.size(), workers * 4));
    const bool disk = cfg.shuffle == Shuffle::DiskSpill;

    std::optional<TempDir> dir;
    if (disk) dir.emplace(cfg.spill_dir);
    auto spill_file = [&](std::size_t task, std::size_t p) {
        return dir->path() / ("map-" + std::to_string(task) + ".part-" + std::to_string(p));
    };

    // map: one task per contiguous input split, output bucketed by partition
    auto t0 = Clock::now();
    std::vector<std::vector<std::vector<Pair>>> buckets(n_map, std::vector<std::vector<Pair>>(parts));
    std::vector<std::uint64_t> spilled(n_map, 0), mapped(n_map, 0);
    std::vector<double> io_time(n_map, 0.0);
    run_tasks(n_map, workers, [&](std::size_t task) {
        std::size_t begin = input.size() * task / n_map;
        std::size_t end = input.size() * (task + 1) / n_map;
        auto& mine = buckets[task];
        for (std::size_t i = begin; i < end; ++i) {
            for (auto& kv : map_record(job, task, input[i])) {
                ++mapped[task];
                mine[partition_of(kv.key, parts)].push_back(std::move(kv));
            }
        }
        if (disk) {
            auto io = Clock::now();
            for (std::size_t p = 0; p < parts; ++p) {
                spilled[task] += spill(spill_file(task, p), mine[p]);
                std::vector<Pair>().swap(mine[p]);
            }
            io_time[task] += seconds_since(io);
        }
    });
    report.map_seconds += seconds_since(t0);
    for (std::size_t t = 0; t < n_map; ++t) {
        report.bytes_spilled += spilled[t];
        report.records_intermediate += mapped[t];
    }

    // shuffle: gather each partition from every map task, then sort it
    auto t1 = Clock::now();
    std::vector<std::vector<Pair>> partition_data(parts);
    std::vector<double> read_time(parts, 0.0);
    run_tasks(parts, workers, [&](std::size_t p) {
        auto& data = partition_data[p];
        if (disk) {
            auto io = Clock::now();
            for (std::size_t task = 0; task < n_map; ++task) unspill(spill_file(task, p), data);
            read_time[p] += seconds_since(io);
        } else {
            for (std::size_t task = 0; task < n_map; ++task) {
                auto& src = buckets[task][p];
                data.insert(data.end(), std::make_move_iterator(src.begin()), std::make_move_iterator(src.end()));
                std::vector<Pair>().swap(src);
            }
        }
        std::sort(data.begin(), data.end());
    });
    report.shuffle_seconds += seconds_since(t1);
    double io_total = 0;
    for (double t : io_time) io_total += t;
    for (double t : read_time) io_total += t;
    report.spill_io_seconds += io_total;

    // reduce: every key group is one unit of work
    auto t2 = Clock::now();
    struct Group {
        std::size_t partition;
        Pair* begin;
        Pair* end;
    };
    std::vector<Group> groups;
    for (std::size_t p = 0; p < parts; ++p) {
        auto& data = partition_data[p];
        for (std::size_t b = 0; b < data.size();) {
            std::size_t e = b + 1;
            while (e < data.size() && data[e].key == data[b].key) ++e;
            groups.push_back({p, data.data() + b, data.data() + e});
            b = e;
        }
    }
    const std::size_t n_chunks = std::max<std::size_t>(1, std::min(groups.size(), workers * 4));
    std::vector<std::vector<KeyValue<OK, OV>>> chunk_out(n_chunks);
    run_tasks(n_chunks, workers, [&](std::size_t c) {
        std::size_t begin = groups.size() * c / n_chunks;
        std::size_t end = groups.size() * (c + 1) / n_chunks;
        for (std::size_t g = begin; g < end; ++g)
            reduce_group(job, groups[g].partition, groups[g].begin, groups[g].end, chunk_out[c]);
    });
    std::vector<KeyValue<OK, OV>> out;
    for (auto& chunk : chunk_out)
        out.insert(out.end(), std::make_move_iterator(chunk.begin()), std::make_move_iterator(chunk.end()));
    std::sort(out.begin(), out.end());
    report.reduce_seconds += seconds_since(t2);
    return out;
}

template <class T>
std::vector<T> materialize_boundary(std::vector<T>&& data, const EngineConfig& cfg, TimingReport& report) {
    if (cfg.shuffle != Shuffle::DiskSpill) return std::move(data);
    auto io = Clock::now();
    TempDir dir(cfg.spill_dir);
    auto file = dir.path() / "boundary";
    std::vector<std::string> records;
    records.reserve(data.size());
    for (const auto& kv : data) records.push_back(encode_kv(kv));
    data.clear();
    report.bytes_spilled += write_records(file, records);
    records.clear();
    std::vector<T> back;
    using K = decltype(T::key);
    using V = decltype(T::value);
    for (const auto& rec : read_records(file)) back.push_back(decode_kv<K, V>(rec));
    report.spill_io_seconds += seconds_since(io);
    return back;
}

}  // namespace detail

/// Runs one job. If `report` is given, phase timings and counters are added
/// to it. Throws TaskError when a user function throws and SpillIOError when
/// spill files cannot be written or read.
template <class In, class K, class V, class OK, class OV>
std::vector<KeyValue<OK, OV>> run_job(const std::vector<In>& input, const JobSpec<In, K, V, OK, OV>& job,
                                      const EngineConfig& cfg, TimingReport* report = nullptr) {
    cfg.validate();
    if (job.partitions == 0) throw InvalidParams("job '" + job.name + "' needs at least one partition");
    if (!job.map || !job.reduce) throw InvalidParams("job '" + job.name + "' is missing a map or reduce function");

    TimingReport local;
    TimingReport& r = report ? *report : local;
    r.describe(cfg);
    auto start = detail::Clock::now();
    r.records_in += input.size();
    r.jobs += 1;

    auto out = cfg.executor == Executor::Sequential ? detail::run_sequential(input, job, cfg, r)
                                                    : detail::run_parallel(input, job, cfg, r);
    r.records_out += out.size();
    r.total_seconds += detail::seconds_since(start);
    return out;
}

namespace detail {

template <class Input>
Input chain_impl(Input&& input, const EngineConfig&, TimingReport*, std::size_t) {
    return std::move(input);
}

template <class Input, class Job, class... Rest>
auto chain_impl(Input&& input, const EngineConfig& cfg, TimingReport* report, std::size_t index,
                const Job& job, const Rest&... rest) {
    std::vector<typename Job::output_type> out;
    try {
        out = run_job(input, job, cfg, report);
    } catch (const TaskError& e) {
        throw e.with_job_index(static_cast<long>(index));
    } catch (const SpillIOError& e) {
        throw SpillIOError("job " + std::to_string(index) + ": " + e.what());
    }
    if constexpr (sizeof...(Rest) == 0) {
        return out;
    } else {
        TimingReport local;
        TimingReport& r = report ? *report : local;
        auto start = Clock::now();
        auto next = materialize_boundary(std::move(out), cfg, r);
        r.total_seconds += seconds_since(start);
        return chain_impl(std::move(next), cfg, report, index + 1, rest...);
    }
}

}  // namespace detail

/// Runs jobs left to right, feeding each job's output records to the next.
/// Under DiskSpill every inter-job boundary goes through a temp file.
/// Errors carry the index of the failing job.
template <class In, class Job, class... Rest>
auto chain(const std::vector<In>& input, const EngineConfig& cfg, TimingReport* report, const Job& first,
           const Rest&... rest) {
    static_assert(std::is_same_v<In, typename Job::input_type>, "first job must consume the chain input");
    std::vector<In> copy = input;
    return detail::chain_impl(std::move(copy), cfg, report, 0, first, rest...);
}

template <class T>
struct Instrumented {
    T result;
    TimingReport report;
};

/// Runs `fn(TimingReport&)` and returns its result together with the filled
/// report. Wall-clock total covers the whole call.
template <class F>
auto instrument(const EngineConfig& cfg, F&& fn) {
    TimingReport report;
    report.describe(cfg);
    auto start = detail::Clock::now();
    auto result = fn(report);
    report.total_seconds = detail::seconds_since(start);
    return Instrumented<decltype(result)>{std::move(result), std::move(report)};
}

}  // namespace planrec::mr
