#pragma once

#include <map>
#include <memory>
#include <ostream>

#include "provwatch/compaction.hpp"
#include "provwatch/forensics.hpp"
#include "provwatch/ingest.hpp"
#include "provwatch/judgment.hpp"
#include "provwatch/labeling.hpp"
#include "provwatch/policy.hpp"

namespace provwatch {

struct EngineConfig {
    size_t lst_capacity = 5;
    uint32_t window_t = 50;
    int64_t inactive_secs = 300;

    bool skipping = true;   // Algorithm-1 redundant semantics skipping
    bool pruning = true;    // Algorithm-2 non-viable entity pruning
    bool offload = true;    // inactive-file disk offload
    bool realert = false;

    int max_trace_depth = 25;
    bool full_trace = false;

    std::string offload_path;  // "" = private temp file
    std::string chain_dir;     // "" = chains kept in memory only
    std::ostream* alerts_out = nullptr;

    void disable_compaction() { skipping = pruning = offload = false; }
};

struct RunStats {
    uint64_t events_total = 0;
    uint64_t events_skipped = 0;
    double skip_ratio = 0;
    uint64_t processes_total = 0;
    uint64_t processes_pruned = 0;
    double process_prune_ratio = 0;
    uint64_t files_total = 0;
    uint64_t files_offloaded = 0;
    double file_offload_ratio = 0;
    uint64_t networks_total = 0;
    std::map<std::string, uint64_t> alerts_by_name;
    uint64_t alerts_total = 0;
    uint64_t apt_alerts = 0;
    double throughput_eps = 0;  // wall clock, filled by the runner
    uint64_t peak_resident_entities = 0;
    uint64_t queue_high_water = 0;
    uint64_t queue_capacity = 0;
    uint64_t out_of_order_dropped = 0;
    uint64_t unknown_exits = 0;
    uint64_t window_refreshes = 0;
    uint64_t table_flushes = 0;

    std::string to_json() const;
};

// The single-threaded detection core: compaction -> graph -> labels ->
// judgment -> forensics, one retained event at a time.
class Engine {
public:
    Engine(EngineConfig cfg, Policy policy);

    void process(const EventRecord& e);
    void finish();

    RunStats stats() const;
    GraphStore& store() { return store_; }
    const std::vector<Alert>& alerts() const { return sink_.alerts(); }
    const std::vector<AttackChain>& chains() const { return chains_; }
    const Policy& policy() const { return policy_; }
    const Compactor& compactor() const { return compactor_; }

private:
    void offload_tick(int64_t ts);
    void raise_alerts(const ProcessNode& proc, const EventRecord& cause);

    EngineConfig cfg_;
    Policy policy_;
    GraphStore store_;
    Compactor compactor_;
    Labeler labeler_;
    JudgmentEngine judgment_;
    AlertSink sink_;
    std::vector<AttackChain> chains_;

    uint64_t events_total_ = 0;
    uint64_t events_skipped_ = 0;
    int64_t next_offload_tick_ = 0;
    int64_t tick_interval_ = 0;
    size_t chain_counter_ = 0;
};

struct RunResult {
    RunStats stats;
    std::vector<Alert> alerts;
    std::vector<AttackChain> chains;
    std::vector<EntityId> pruned;
    double wall_seconds = 0;
    int exit_code = 0;  // 0 clean, 2 when an APT alert fired
};

// Drives an engine synchronously off a reader (single thread).
RunResult run_sync(const StreamSource& src, Engine& engine);

// Producer/consumer run over a bounded queue: one ingest thread feeding one
// pipeline thread. Parse errors propagate after in-flight events drain.
RunResult run_threaded(const StreamSource& src, Engine& engine, size_t queue_capacity);

}  // namespace provwatch
