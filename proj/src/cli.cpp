#include "planrec/cli.hpp"

#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "planrec/bench.hpp"
#include "planrec/datagen.hpp"
#include "planrec/error.hpp"
#include "planrec/persistence.hpp"
#include "planrec/recommender.hpp"

namespace planrec {

namespace {

struct EngineFlags {
    std::size_t workers = 1;
    std::string shuffle = "memory";
    std::string executor = "parallel";

    void add_to(CLI::App* cmd) {
        cmd->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
        cmd->add_option("--shuffle", shuffle, "Shuffle mode")->check(CLI::IsMember({"memory", "disk"}));
        cmd->add_option("--executor", executor, "Executor")->check(CLI::IsMember({"sequential", "parallel"}));
    }
    mr::EngineConfig config() const {
        mr::EngineConfig cfg;
        cfg.executor = mr::parse_executor(executor);
        cfg.workers = workers;
        cfg.shuffle = mr::parse_shuffle(shuffle);
        return cfg;
    }
};

struct ClusterFlags {
    double eps = 0.5;
    std::size_t min_pts = 3;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--eps", eps, "DBSCAN radius in (0, 1]")->check(CLI::Range(0.0, 1.0));
        cmd->add_option("--min-pts", min_pts, "DBSCAN core size")->check(CLI::PositiveNumber);
    }
    ClusteringParams params() const { return {eps, min_pts}; }
};

void emit(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-") out << content;
    else write_file(path, content);
}

void report_failures(const std::vector<QueryFailure>& failures, std::ostream& err) {
    for (const auto& f : failures) err << "warning: skipped query " << f.query_id << ": " << f.message << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Clusters SQL queries by text similarity and recommends stored execution plans.", "planrec"};
    app.require_subcommand(1, 1);

    std::string input, output, workspace, templates_path, manifest_path, sql;
    std::uint64_t seed = 42;
    EngineFlags engine;
    ClusterFlags clustering;

    auto* gen = app.add_subcommand("gen", "Generate a labeled query set from templates");
    std::size_t classes = 7, queries = 235;
    double overlap = 0.0;
    gen->add_option("--templates", templates_path, "Template manifest (JSON)")->check(CLI::ExistingFile);
    gen->add_option("--classes", classes, "Synthetic template count")->check(CLI::PositiveNumber);
    gen->add_option("--queries", queries, "Synthetic query count")->check(CLI::PositiveNumber);
    gen->add_option("--overlap", overlap, "Shared fraction of clause units")->check(CLI::Range(0.0, 1.0));
    gen->add_option("--seed", seed, "Generator seed");
    gen->add_option("-o,--output", output, "Query file (default stdout)");

    auto* feat = app.add_subcommand("featurize", "Queries -> TF vectors");
    feat->add_option("-i,--input", input, "Query file")->required()->check(CLI::ExistingFile);
    feat->add_option("-o,--output", output, "Vectors file (default stdout)");
    engine.add_to(feat);

    auto* sim = app.add_subcommand("similarity", "TF vectors -> distance matrix");
    sim->add_option("-i,--input", input, "Vectors file")->required()->check(CLI::ExistingFile);
    sim->add_option("-o,--output", output, "Matrix file (default stdout)");
    engine.add_to(sim);

    auto* clu = app.add_subcommand("cluster", "Distance matrix -> cluster model");
    clu->add_option("-i,--input", input, "Matrix file")->required()->check(CLI::ExistingFile);
    clu->add_option("-o,--output", output, "Clusters file (default stdout)");
    clustering.add_to(clu);

    auto* build = app.add_subcommand("build", "Queries -> plan store workspace");
    build->add_option("-i,--input", input, "Labeled query file")->required()->check(CLI::ExistingFile);
    build->add_option("-w,--workspace", workspace, "Workspace directory")->required();
    engine.add_to(build);
    clustering.add_to(build);

    auto* rec = app.add_subcommand("recommend", "Recommend a stored plan for one SQL statement");
    std::optional<double> threshold;
    rec->add_option("-w,--workspace", workspace, "Workspace directory")->required()->check(CLI::ExistingDirectory);
    rec->add_option("sql", sql, "SQL statement")->required();
    rec->add_option("--threshold", threshold, "Minimum similarity for reuse (default 1 - eps)")
        ->check(CLI::Range(0.0, 1.0));

    auto* bench = app.add_subcommand("bench", "Time the pipeline over generated sets -> CSV");
    std::vector<std::size_t> bench_workers;
    std::vector<std::string> bench_modes;
    std::size_t repeats = 0;
    bool per_phase = false;
    bench->add_option("-m,--manifest", manifest_path, "Bench manifest (JSON)")->check(CLI::ExistingFile);
    bench->add_option("--workers", bench_workers, "Worker counts, e.g. 1,4")
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    bench->add_option("--shuffle", bench_modes, "Shuffle modes, e.g. memory,disk")
        ->delimiter(',')
        ->check(CLI::IsMember({"memory", "disk"}));
    bench->add_option("--repeats", repeats, "Runs per cell (median reported)")->check(CLI::PositiveNumber);
    bench->add_flag("--per-phase", per_phase, "Also report featurize/similarity/cluster rows");
    bench->add_option("--seed", seed, "Generator seed");
    bench->add_option("-o,--output", output, "CSV file (default stdout)");

    std::vector<std::string> argv_store{"planrec"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        if (gen->parsed()) {
            std::vector<Query> qs;
            if (!templates_path.empty()) {
                auto m = parse_template_manifest(read_file(templates_path), templates_path);
                if (gen->count("--seed")) m.seed = seed;
                qs = generate(m.templates, m.counts, m.seed);
            } else {
                qs = generate_set({"generated", classes, queries}, overlap, seed);
            }
            emit(output, format_queries(qs), out);
        } else if (feat->parsed()) {
            auto result = featurize(parse_queries(read_file(input), input), engine.config());
            report_failures(result.failures, err);
            emit(output, format_vectors(result.vectors), out);
        } else if (sim->parsed()) {
            auto vectors = parse_vectors(read_file(input), input);
            std::vector<std::string> ids;
            for (const auto& v : vectors) ids.push_back(v.query_id);
            emit(output, format_matrix(to_distance_matrix(pairwise_job(vectors, engine.config()), ids)), out);
        } else if (clu->parsed()) {
            emit(output, format_clusters(cluster(parse_matrix(read_file(input), input), clustering.params())), out);
        } else if (build->parsed()) {
            std::vector<QueryFailure> rejected;
            auto store = build_store(parse_queries(read_file(input), input), clustering.params(), engine.config(),
                                     &rejected);
            report_failures(rejected, err);
            save_workspace(workspace, store, engine.config());
            out << "stored " << store.size() << " queries in " << store.model.cluster_count() << " clusters\n";
        } else if (rec->parsed()) {
            auto ws = load_workspace(workspace);
            auto r = recommend(Query{"new", sql, std::nullopt}, ws.store, threshold);
            out << "verdict: " << to_string(r.verdict) << '\n';
            if (r.reuse()) {
                out << "plan: " << r.qep_hash << '\n' << "cluster: " << r.cluster_id << '\n';
            }
            if (!r.best_match_id.empty()) out << "match: " << r.best_match_id << '\n';
            out << "similarity: " << format_double(r.similarity) << '\n';
        } else if (bench->parsed()) {
            BenchManifest m;
            if (!manifest_path.empty()) {
                m = parse_bench_manifest(read_file(manifest_path), manifest_path);
            } else {
                m.shapes = standard_shapes();
                m.overlaps.assign(m.shapes.size(), 0.0);
            }
            if (bench->count("--seed")) m.seed = seed;
            if (!bench_workers.empty()) m.config.worker_counts = bench_workers;
            if (!bench_modes.empty()) {
                m.config.modes.clear();
                for (const auto& mode : bench_modes) m.config.modes.push_back(mr::parse_shuffle(mode));
            }
            if (repeats) m.config.repeats = repeats;
            if (per_phase) m.config.per_phase = true;
            m.config.validate();

            std::vector<QuerySet> sets;
            for (std::size_t i = 0; i < m.shapes.size(); ++i)
                sets.push_back({m.shapes[i].name, generate_set(m.shapes[i], m.overlaps[i], m.seed)});
            auto report = run_benchmark(sets, m.config);
            emit(output, report.csv(), out);
            std::ostream& info = output.empty() || output == "-" ? err : out;
            for (const auto& e : report.errors)
                info << "error: " << e.dataset << " workers=" << e.workers << " mode=" << mr::to_string(e.mode)
                     << ": " << e.message << '\n';
            if (auto ratio = report.average_mode_speedup())
                info << "average disk/memory time ratio: " << format_double(*ratio) << '\n';
            if (!report.errors.empty()) return kExitData;
        }
    } catch (const InvalidParams& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitOk;
}

}  // namespace planrec
