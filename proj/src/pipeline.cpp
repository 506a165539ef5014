#include "provwatch/pipeline.hpp"

#include <algorithm>
#include <exception>
#include <fstream>
#include <thread>

#include "json.hpp"

namespace provwatch {

namespace {
constexpr int64_t kNsPerSec = 1'000'000'000;
}

std::string RunStats::to_json() const {
    nlohmann::ordered_json doc;
    doc["schema"] = 1;
    doc["events_total"] = events_total;
    doc["events_skipped"] = events_skipped;
    doc["skip_ratio"] = skip_ratio;
    doc["processes_total"] = processes_total;
    doc["processes_pruned"] = processes_pruned;
    doc["process_prune_ratio"] = process_prune_ratio;
    doc["files_total"] = files_total;
    doc["files_offloaded"] = files_offloaded;
    doc["file_offload_ratio"] = file_offload_ratio;
    doc["networks_total"] = networks_total;
    doc["alerts_by_name"] = alerts_by_name;
    doc["alerts_total"] = alerts_total;
    doc["apt_alerts"] = apt_alerts;
    doc["throughput_eps"] = throughput_eps;
    doc["peak_resident_entities"] = peak_resident_entities;
    doc["queue_high_water"] = queue_high_water;
    doc["queue_capacity"] = queue_capacity;
    doc["out_of_order_dropped"] = out_of_order_dropped;
    doc["unknown_exits"] = unknown_exits;
    doc["window_refreshes"] = window_refreshes;
    doc["table_flushes"] = table_flushes;
    return doc.dump(2);
}

Engine::Engine(EngineConfig cfg, Policy policy)
    : cfg_(cfg),
      policy_(std::move(policy)),
      store_(cfg.offload_path),
      compactor_(cfg.lst_capacity, cfg.window_t),
      labeler_(&policy_),
      judgment_(&policy_, cfg.realert),
      sink_(cfg.alerts_out) {
    tick_interval_ = std::clamp<int64_t>(cfg_.inactive_secs * kNsPerSec / 10, kNsPerSec,
                                         60 * kNsPerSec);
}

void Engine::raise_alerts(const ProcessNode& proc, const EventRecord& cause) {
    for (Alert& a : judgment_.evaluate(proc, cause.ts)) {
        if (a.severity == Severity::APT) {
            // APT verdicts trigger the forensic trace immediately.
            Tracer tracer(&store_, &policy_, {cfg_.max_trace_depth, cfg_.full_trace});
            AttackChain chain = tracer.backward_trace(proc.id, cause.ts + 1);
            if (!cfg_.chain_dir.empty()) {
                std::string path =
                    cfg_.chain_dir + "/chain-" + std::to_string(chain_counter_++) + ".json";
                std::ofstream out(path);
                out << chain.to_json() << '\n';
                a.chain_ref = path;
            } else {
                a.chain_ref = "chain:" + std::to_string(chain_counter_++);
            }
            chains_.push_back(std::move(chain));
        }
        sink_.emit(a);
    }
}

void Engine::process(const EventRecord& e) {
    ++events_total_;

    if (cfg_.skipping) {
        CompactionDecision d = compactor_.skip_or_retain(e);
        if (d.action == CompactionAction::Skip) {
            ++events_skipped_;
            offload_tick(e.ts);
            return;
        }
    }

    auto fx = store_.apply_event(e);

    bool subject_touched = false;
    for (const EntityId& id : fx.init_targets) {
        LabelSet added = labeler_.apply_init_rules(store_, id, e.ts, e.seq);
        if (id == e.subject && !added.empty()) subject_touched = true;
    }
    if (fx.forked) {
        // inherited status labels plus any init labels may already satisfy a rule
        if (const ProcessNode* child = store_.process(fx.fork_child)) {
            if (!child->labels.empty()) raise_alerts(*child, e);
        }
    }
    if (fx.subject_renamed) {
        LabelSet added = labeler_.apply_init_rules(store_, e.subject, e.ts, e.seq);
        if (!added.empty()) subject_touched = true;
    }

    auto prop = labeler_.propagate(store_, e);
    if (!prop.subject_added.empty()) subject_touched = true;

    if (subject_touched) {
        if (const ProcessNode* subj = store_.process(e.subject)) raise_alerts(*subj, e);
    }

    if (e.etype == EventType::Recv && cfg_.skipping) {
        store_.set_window_mirror(e.object, compactor_.window_counter(e.object));
    }

    if (e.etype == EventType::Exit && cfg_.pruning) {
        prune_on_exit(store_, e.subject, policy_.phf);
    }

    offload_tick(e.ts);
}

void Engine::offload_tick(int64_t ts) {
    if (!cfg_.offload) return;
    if (next_offload_tick_ == 0) {
        next_offload_tick_ = ts + tick_interval_;
        return;
    }
    while (ts >= next_offload_tick_) {
        store_.offload_inactive(next_offload_tick_, cfg_.inactive_secs * kNsPerSec);
        next_offload_tick_ += tick_interval_;
    }
}

void Engine::finish() { sink_.flush(); }

RunStats Engine::stats() const {
    RunStats s;
    s.events_total = events_total_;
    s.events_skipped = events_skipped_;
    s.skip_ratio = events_total_ ? static_cast<double>(events_skipped_) / events_total_ : 0;
    s.processes_total = store_.processes_total();
    s.processes_pruned = store_.processes_pruned();
    s.process_prune_ratio =
        s.processes_total ? static_cast<double>(s.processes_pruned) / s.processes_total : 0;
    s.files_total = store_.files_total();
    s.files_offloaded = store_.files_offloaded_now();
    s.file_offload_ratio =
        s.files_total ? static_cast<double>(s.files_offloaded) / s.files_total : 0;
    s.networks_total = store_.networks_total();
    for (const auto& a : sink_.alerts()) {
        ++s.alerts_by_name[a.name];
        ++s.alerts_total;
        if (a.severity == Severity::APT) ++s.apt_alerts;
    }
    s.peak_resident_entities = store_.peak_resident_entities();
    s.unknown_exits = store_.unknown_exits();
    s.window_refreshes = compactor_.stats().window_refreshes;
    s.table_flushes = compactor_.stats().table_flushes;
    return s;
}

namespace {

RunResult collect(Engine& engine, const ReaderStats& rs, double wall_seconds,
                  size_t queue_high_water, size_t queue_capacity) {
    engine.finish();
    RunResult r;
    r.stats = engine.stats();
    r.stats.throughput_eps = wall_seconds > 0 ? r.stats.events_total / wall_seconds : 0;
    r.stats.out_of_order_dropped = rs.out_of_order_dropped;
    r.stats.queue_high_water = queue_high_water;
    r.stats.queue_capacity = queue_capacity;
    r.alerts = engine.alerts();
    r.chains = engine.chains();
    r.pruned = engine.store().pruned_ids();
    r.wall_seconds = wall_seconds;
    r.exit_code = r.stats.apt_alerts > 0 ? 2 : 0;
    return r;
}

}  // namespace

RunResult run_sync(const StreamSource& src, Engine& engine) {
    EventReader reader(src);
    auto start = std::chrono::steady_clock::now();
    while (auto e = reader.next()) engine.process(*e);
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return collect(engine, reader.stats(), wall, 0, 0);
}

RunResult run_threaded(const StreamSource& src, Engine& engine, size_t queue_capacity) {
    EventReader reader(src);
    BoundedQueue<EventRecord> queue(queue_capacity);
    std::exception_ptr producer_error;

    auto start = std::chrono::steady_clock::now();
    std::thread producer([&] {
        try {
            auto pace_start = std::chrono::steady_clock::now();
            uint64_t sent = 0;
            while (auto e = reader.next()) {
                if (src.rate_limit && *src.rate_limit > 0) {
                    auto due = pace_start + std::chrono::duration<double>(sent / *src.rate_limit);
                    std::this_thread::sleep_until(due);
                }
                queue.push(std::move(*e));
                ++sent;
            }
        } catch (...) {
            producer_error = std::current_exception();
        }
        queue.close();
    });

    while (auto e = queue.pop()) engine.process(*e);
    producer.join();
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (producer_error) std::rethrow_exception(producer_error);
    return collect(engine, reader.stats(), wall, queue.high_water(), queue.capacity());
}

}  // namespace provwatch
