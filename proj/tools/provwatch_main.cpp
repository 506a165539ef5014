#include <filesystem>
#include <map>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "provwatch/pipeline.hpp"
#include "provwatch/scenario.hpp"

using namespace provwatch;

namespace {

struct CommonOpts {
    std::string replay;
    bool live = false;
    double rate = 0;
    std::string policy_path;
    size_t lst_cap = 5;
    uint32_t window_t = 50;
    int64_t inactive_secs = 300;
    bool no_compaction = false;
    bool no_pruning = false;
    bool no_offload = false;
    bool realert = false;
    bool full_trace = false;
    int trace_depth = 25;
    std::string alerts_out = "-";
    std::string stats_out;
    std::string dump_graph;
    std::string chain_dir;
    std::string offload_path;
    size_t queue_cap = 65536;
};

void add_engine_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--replay", o.replay, "replay a canonical-format corpus file");
    cmd->add_flag("--live", o.live, "read canonical lines from standard input");
    cmd->add_option("--rate", o.rate, "replay throttle (events/second)");
    cmd->add_option("--policy", o.policy_path, "detection policy file (default: built-in)");
    cmd->add_option("--lst-cap", o.lst_cap, "latest-semantic-table capacity threshold")
        ->default_val(5);
    cmd->add_option("--window-t", o.window_t, "network receive refresh window")->default_val(50);
    cmd->add_option("--inactive-secs", o.inactive_secs, "file inactivity threshold for offload")
        ->default_val(300);
    cmd->add_flag("--no-compaction", o.no_compaction,
                  "oracle mode: disable skipping, pruning and offload");
    cmd->add_flag("--no-pruning", o.no_pruning, "disable non-viable entity pruning");
    cmd->add_flag("--no-offload", o.no_offload, "disable inactive-file offload");
    cmd->add_flag("--realert", o.realert, "disable alert deduplication (testing)");
    cmd->add_flag("--full-trace", o.full_trace, "expand unlabeled edges in forensic traces");
    cmd->add_option("--trace-depth", o.trace_depth, "forensic trace depth bound")->default_val(25);
    cmd->add_option("--alerts-out", o.alerts_out, "alert sink path ('-' = stdout)");
    cmd->add_option("--stats-out", o.stats_out, "stats report path (JSON)");
    cmd->add_option("--dump-graph", o.dump_graph, "write the resident graph as JSON (.dot for DOT)");
    cmd->add_option("--chain-dir", o.chain_dir, "directory for APT chain exports");
    cmd->add_option("--offload-path", o.offload_path, "offload store path (default: temp file)");
    cmd->add_option("--queue-cap", o.queue_cap, "ingest queue capacity")->default_val(65536);
}

Policy load_policy_opt(const std::string& path) {
    return path.empty() ? Policy::built_in() : Policy::load_file(path);
}

EngineConfig make_config(const CommonOpts& o, std::ostream* alerts) {
    EngineConfig cfg;
    cfg.lst_capacity = o.lst_cap;
    cfg.window_t = o.window_t;
    cfg.inactive_secs = o.inactive_secs;
    if (o.no_compaction) cfg.disable_compaction();
    if (o.no_pruning) cfg.pruning = false;
    if (o.no_offload) cfg.offload = false;
    cfg.realert = o.realert;
    cfg.full_trace = o.full_trace;
    cfg.max_trace_depth = o.trace_depth;
    cfg.chain_dir = o.chain_dir;
    cfg.offload_path = o.offload_path;
    cfg.alerts_out = alerts;
    return cfg;
}

StreamSource make_source(const CommonOpts& o) {
    StreamSource src;
    if (o.live) {
        src.mode = StreamSource::Mode::LivePipe;
    } else {
        if (o.replay.empty()) throw SourceError("need --replay <file> or --live");
        src.mode = StreamSource::Mode::ReplayFile;
        src.path = o.replay;
    }
    if (o.rate > 0) src.rate_limit = o.rate;
    return src;
}

void write_outputs(const CommonOpts& o, Engine& engine, RunResult& result) {
    if (!o.stats_out.empty()) {
        std::ofstream out(o.stats_out);
        out << result.stats.to_json() << '\n';
    }
    if (!o.dump_graph.empty()) {
        std::ofstream out(o.dump_graph);
        if (o.dump_graph.size() > 4 && o.dump_graph.substr(o.dump_graph.size() - 4) == ".dot") {
            engine.store().dump_dot(out);
        } else {
            engine.store().dump_json(out);
        }
    }
}

int cmd_run(const CommonOpts& o) {
    std::ofstream alerts_file;
    std::ostream* alerts = nullptr;
    if (o.alerts_out == "-") {
        alerts = &std::cout;
    } else if (!o.alerts_out.empty()) {
        alerts_file.open(o.alerts_out);
        if (!alerts_file) throw SourceError("cannot open alerts output '" + o.alerts_out + "'");
        alerts = &alerts_file;
    }
    if (!o.chain_dir.empty()) std::filesystem::create_directories(o.chain_dir);

    Engine engine(make_config(o, alerts), load_policy_opt(o.policy_path));
    RunResult result = run_threaded(make_source(o), engine, o.queue_cap);
    write_outputs(o, engine, result);
    std::cerr << "processed " << result.stats.events_total << " events, skipped "
              << result.stats.events_skipped << ", alerts " << result.stats.alerts_total
              << " (APT " << result.stats.apt_alerts << ")\n";
    return result.exit_code;
}

int cmd_bench(const CommonOpts& o, const std::string& profile_path, const std::string& rate_csv) {
    Engine engine(make_config(o, nullptr), load_policy_opt(o.policy_path));
    StreamSource src = make_source(o);
    RunResult result = run_threaded(src, engine, o.queue_cap);

    double busy_eps = 0;
    if (!profile_path.empty()) {
        busy_eps = scenario::Manifest::load(profile_path).busy_eps;
    }

    if (!rate_csv.empty()) {
        // per-event-time-second generation curve
        std::ifstream in(src.path);
        std::map<int64_t, uint64_t> buckets;
        std::string line;
        uint64_t lineno = 0;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            EventRecord e = parse_event(line, ++lineno);
            buckets[e.ts / 1'000'000'000]++;
        }
        std::ofstream csv(rate_csv);
        csv << "second,events\n";
        if (!buckets.empty()) {
            int64_t t0 = buckets.begin()->first;
            for (const auto& [sec, n] : buckets) csv << (sec - t0) << "," << n << "\n";
        }
    }

    nlohmann::ordered_json doc;
    doc["events"] = result.stats.events_total;
    doc["wall_seconds"] = result.wall_seconds;
    doc["consumption_eps"] = result.stats.throughput_eps;
    doc["generation_busy_eps"] = busy_eps;
    doc["consumption_over_busy"] =
        busy_eps > 0 ? result.stats.throughput_eps / busy_eps : 0.0;
    doc["queue_high_water"] = result.stats.queue_high_water;
    doc["queue_capacity"] = result.stats.queue_capacity;
    std::cout << doc.dump(2) << '\n';
    if (!o.stats_out.empty()) {
        std::ofstream out(o.stats_out);
        out << result.stats.to_json() << '\n';
    }
    return 0;
}

int cmd_trace(const CommonOpts& o, const std::string& process_key, int64_t at, bool forward,
              const std::string& out_path, const std::string& dot_path) {
    Engine engine(make_config(o, nullptr), load_policy_opt(o.policy_path));
    run_sync(make_source(o), engine);

    Tracer tracer(&engine.store(), &engine.policy(), {o.trace_depth, o.full_trace});
    EntityId origin = process_id(process_key);
    if (!engine.store().known(origin)) origin = file_id(process_key);
    int64_t bound = at;
    AttackChain chain =
        forward ? tracer.forward_trace(origin, bound) : tracer.backward_trace(origin, bound);

    bool out_is_dot = out_path.size() > 4 && out_path.substr(out_path.size() - 4) == ".dot";
    if (out_path.empty() || out_path == "-") {
        std::cout << chain.to_json() << '\n';
    } else {
        std::ofstream out(out_path);
        out << (out_is_dot ? chain.to_dot() : chain.to_json() + "\n");
    }
    if (!dot_path.empty()) {
        std::ofstream out(dot_path);
        out << chain.to_dot();
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"provwatch: streaming provenance-based threat detection engine"};
    app.require_subcommand(1);

    CommonOpts run_opts;
    CLI::App* run = app.add_subcommand("run", "process a stream and raise alerts");
    add_engine_flags(run, run_opts);

    // gen
    std::string gen_scenario = "BENIGN";
    uint64_t gen_seed = 7;
    uint64_t gen_events = 0;
    std::string gen_out = "corpus.jsonl";
    std::string gen_manifest;
    CLI::App* gen = app.add_subcommand("gen", "generate a scenario corpus + ground-truth manifest");
    gen->add_option("--scenario", gen_scenario, "L1|L2|L3|E1|E2|BENIGN")->required();
    gen->add_option("--seed", gen_seed, "generator seed")->default_val(7);
    gen->add_option("--events", gen_events, "approximate event count (0 = scenario default)");
    gen->add_option("--out", gen_out, "corpus output path")->required();
    gen->add_option("--manifest", gen_manifest, "ground-truth manifest output path");

    // trace
    CommonOpts trace_opts;
    std::string trace_process;
    int64_t trace_at = std::numeric_limits<int64_t>::max();
    bool trace_forward = false;
    std::string trace_out, trace_dot;
    CLI::App* trace = app.add_subcommand("trace", "reconstruct an attack chain for an entity");
    add_engine_flags(trace, trace_opts);
    trace->add_option("--process", trace_process, "entity key (process id or file path)")
        ->required();
    trace->add_option("--at", trace_at, "trace anchor timestamp (ns; default: end of stream)");
    trace->add_flag("--forward", trace_forward, "forward (impact) trace instead of backward");
    trace->add_option("--out", trace_out, "chain JSON output ('-' = stdout)");
    trace->add_option("--dot", trace_dot, "also write a DOT rendering");

    // bench
    CommonOpts bench_opts;
    std::string bench_profile, bench_csv;
    CLI::App* bench = app.add_subcommand("bench", "measure end-to-end throughput");
    add_engine_flags(bench, bench_opts);
    bench->add_option("--profile", bench_profile, "generator manifest with the emission profile");
    bench->add_option("--rate-csv", bench_csv, "write the generation rate curve as CSV");

    // policy lint
    std::string lint_path;
    CLI::App* policy = app.add_subcommand("policy", "policy utilities");
    policy->require_subcommand(1);
    CLI::App* lint = policy->add_subcommand("lint", "validate a policy file without running");
    lint->add_option("--policy", lint_path, "policy file (default: built-in)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_opts);
        if (gen->parsed()) {
            scenario::Kind kind;
            if (!scenario::kind_from_name(gen_scenario, &kind)) {
                std::cerr << "unknown scenario '" << gen_scenario << "'\n";
                return 1;
            }
            scenario::Spec spec{kind, gen_seed, gen_events};
            scenario::Manifest m = scenario::generate_files(spec, gen_out, gen_manifest);
            std::cerr << "wrote " << m.event_count << " events to " << gen_out << '\n';
            return 0;
        }
        if (trace->parsed()) {
            return cmd_trace(trace_opts, trace_process, trace_at, trace_forward, trace_out,
                             trace_dot);
        }
        if (bench->parsed()) return cmd_bench(bench_opts, bench_profile, bench_csv);
        if (lint->parsed()) {
            Policy p = load_policy_opt(lint_path);
            std::cout << "policy ok: " << p.init_rules.size() << " init rules, "
                      << p.transfer_rules.size() << " transfer rules, "
                      << p.judgment_rules.size() << " judgment rules, PHF size "
                      << p.phf.count() << '\n';
            return 0;
        }
    } catch (const ParseError& e) {
        std::cerr << "parse error at line " << e.line << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
