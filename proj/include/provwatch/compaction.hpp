#pragma once

#include <cstdint>
#include <unordered_map>

#include "provwatch/event.hpp"
#include "provwatch/graph.hpp"
#include "provwatch/labels.hpp"

namespace provwatch {

enum class CompactionAction : uint8_t { Retain, Skip };

enum class CompactionReason : uint8_t {
    NewSubject,
    SemanticsChanged,
    RedundantSemantics,
    WindowRefresh,
    TableFlushed,
    WriteInvalidation,
};

const char* to_string(CompactionReason r);

struct CompactionDecision {
    CompactionAction action;
    CompactionReason reason;
};

// The (etype, object) pair that summarizes a subject's latest semantics.
struct EventSignature {
    EventType etype;
    EntityId object;
    bool operator==(const EventSignature&) const = default;
};

// Bounded per-subject table of the last retained event signature. Emptied
// whenever it reaches the capacity threshold.
class LatestSemanticTable {
public:
    explicit LatestSemanticTable(size_t capacity_threshold = 5)
        : capacity_(capacity_threshold) {}

    const EventSignature* find(const EntityId& subject) const;
    void upsert(const EntityId& subject, EventSignature sig);
    bool erase(const EntityId& subject);
    void clear() { entries_.clear(); }
    size_t size() const { return entries_.size(); }
    size_t capacity_threshold() const { return capacity_; }

    // Drops every entry (other than the writing subject's own) whose stored
    // signature references `object`; returns how many were dropped.
    size_t invalidate_object(const EntityId& object, const EntityId& except_subject);

private:
    size_t capacity_;
    std::unordered_map<EntityId, EventSignature, EntityIdHash> entries_;
};

// Per-network-entity interval counters: receives are force-retained at least
// once every window_t occurrences so refreshed remote semantics are observed.
class NetworkRefreshWindow {
public:
    explicit NetworkRefreshWindow(uint32_t window_t = 50) : window_t_(window_t) {}

    // True when the counter has reached the window and the receive must be
    // retained; resets the counter. Otherwise increments it.
    bool should_force_retain(const EntityId& network);
    uint32_t counter(const EntityId& network) const;
    uint32_t window() const { return window_t_; }

private:
    uint32_t window_t_;
    std::unordered_map<EntityId, uint32_t, EntityIdHash> counters_;
};

struct CompactionStats {
    uint64_t events_seen = 0;
    uint64_t events_skipped = 0;
    uint64_t window_refreshes = 0;
    uint64_t table_flushes = 0;
};

// Streaming redundant-semantics filter. Fork and exit events pass through
// untouched (the process tree consumes them structurally); everything else
// follows the latest-semantic-table algorithm with WRITE/RECV invalidation.
class Compactor {
public:
    Compactor(size_t lst_capacity = 5, uint32_t window_t = 50)
        : lst_(lst_capacity), window_(window_t) {}

    CompactionDecision skip_or_retain(const EventRecord& e);

    const LatestSemanticTable& table() const { return lst_; }
    const NetworkRefreshWindow& window() const { return window_; }
    uint32_t window_counter(const EntityId& net) const { return window_.counter(net); }
    const CompactionStats& stats() const { return stats_; }

private:
    LatestSemanticTable lst_;
    NetworkRefreshWindow window_;
    CompactionStats stats_;
};

// Non-viable entity pruning (exit + leaf + no potential-harmful-functionality
// labels), cascading upward through exited ancestors freed by the removal.
struct PruneOutcome {
    bool pruned = false;
    size_t cascaded = 0;  // additional ancestors removed
};
PruneOutcome prune_on_exit(GraphStore& store, const EntityId& process, LabelSet phf);

}  // namespace provwatch
