#include "planrec/mr_engine.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>
#include <thread>

#include <unistd.h>

namespace planrec::mr {

std::filesystem::path default_spill_dir() {
    if (const char* env = std::getenv("PLANREC_TMPDIR"); env && *env) return env;
    std::error_code ec;
    auto tmp = std::filesystem::temp_directory_path(ec);
    return ec ? std::filesystem::path("/tmp") : tmp;
}

void EngineConfig::validate() const {
    if (workers == 0) throw InvalidParams("engine needs at least one worker");
}

std::string to_string(Executor e) { return e == Executor::Sequential ? "sequential" : "parallel"; }

std::string to_string(Shuffle s) { return s == Shuffle::InMemory ? "memory" : "disk"; }

Shuffle parse_shuffle(std::string_view text) {
    if (text == "memory") return Shuffle::InMemory;
    if (text == "disk") return Shuffle::DiskSpill;
    throw InvalidParams("unknown shuffle mode '" + std::string(text) + "' (expected memory or disk)");
}

Executor parse_executor(std::string_view text) {
    if (text == "sequential") return Executor::Sequential;
    if (text == "parallel") return Executor::Parallel;
    throw InvalidParams("unknown executor '" + std::string(text) + "' (expected sequential or parallel)");
}

void TimingReport::describe(const EngineConfig& cfg) {
    executor = to_string(cfg.executor);
    workers = cfg.executor == Executor::Sequential ? 1 : cfg.workers;
    shuffle = to_string(cfg.shuffle);
}

std::string TimingReport::csv_header() {
    return "executor,workers,shuffle,jobs,map_seconds,shuffle_seconds,reduce_seconds,spill_io_seconds,"
           "total_seconds,bytes_spilled,records_in,records_intermediate,records_out";
}

std::string TimingReport::csv_row() const {
    std::ostringstream os;
    os << executor << ',' << workers << ',' << shuffle << ',' << jobs << ',' << map_seconds << ','
       << shuffle_seconds << ',' << reduce_seconds << ',' << spill_io_seconds << ',' << total_seconds << ','
       << bytes_spilled << ',' << records_in << ',' << records_intermediate << ',' << records_out;
    return os.str();
}

namespace detail {

TempDir::TempDir(const std::filesystem::path& root) {
    static std::atomic<std::uint64_t> counter{0};
    std::error_code ec;
    std::filesystem::create_directories(root, ec);
    if (ec || !std::filesystem::is_directory(root))
        throw SpillIOError("cannot use spill directory '" + root.string() + "'");
    path_ = root / ("planrec-spill-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    if (!std::filesystem::create_directory(path_, ec) || ec)
        throw SpillIOError("cannot create spill directory '" + path_.string() + "'");
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

std::uint64_t write_records(const std::filesystem::path& file, const std::vector<std::string>& records) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw SpillIOError("cannot open spill file '" + file.string() + "'");
    std::uint64_t bytes = 0;
    for (const auto& rec : records) {
        auto len = static_cast<std::uint32_t>(rec.size());
        char prefix[4];
        std::memcpy(prefix, &len, 4);
        out.write(prefix, 4);
        out.write(rec.data(), static_cast<std::streamsize>(rec.size()));
        bytes += 4 + rec.size();
    }
    out.close();
    if (!out) throw SpillIOError("write failed for spill file '" + file.string() + "'");
    return bytes;
}

std::vector<std::string> read_records(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw SpillIOError("cannot open spill file '" + file.string() + "'");
    std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw SpillIOError("read failed for spill file '" + file.string() + "'");
    std::vector<std::string> records;
    std::string_view rest(blob);
    while (!rest.empty()) {
        auto len = codec::decode<std::uint32_t>(rest);
        if (rest.size() < len) throw SpillIOError("truncated spill file '" + file.string() + "'");
        records.emplace_back(rest.substr(0, len));
        rest.remove_prefix(len);
    }
    return records;
}

void run_tasks(std::size_t n_tasks, std::size_t workers, const std::function<void(std::size_t)>& fn) {
    if (n_tasks == 0) return;
    std::vector<std::exception_ptr> errors(n_tasks);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t; (t = next.fetch_add(1)) < n_tasks;) {
            try {
                fn(t);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        }
    };
    const std::size_t n_threads = std::min(workers, n_tasks);
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_threads);
        for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::string describe_current_exception() {
    try {
        throw;
    } catch (const std::exception& e) {
        return e.what();
    } catch (...) {
        return "unknown exception";
    }
}

}  // namespace detail
}  // namespace planrec::mr
