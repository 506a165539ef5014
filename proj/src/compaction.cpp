#include "provwatch/compaction.hpp"

namespace provwatch {

const char* to_string(CompactionReason r) {
    switch (r) {
        case CompactionReason::NewSubject: return "NewSubject";
        case CompactionReason::SemanticsChanged: return "SemanticsChanged";
        case CompactionReason::RedundantSemantics: return "RedundantSemantics";
        case CompactionReason::WindowRefresh: return "WindowRefresh";
        case CompactionReason::TableFlushed: return "TableFlushed";
        case CompactionReason::WriteInvalidation: return "WriteInvalidation";
    }
    return "?";
}

const EventSignature* LatestSemanticTable::find(const EntityId& subject) const {
    auto it = entries_.find(subject);
    return it == entries_.end() ? nullptr : &it->second;
}

void LatestSemanticTable::upsert(const EntityId& subject, EventSignature sig) {
    entries_[subject] = std::move(sig);
}

bool LatestSemanticTable::erase(const EntityId& subject) { return entries_.erase(subject) > 0; }

size_t LatestSemanticTable::invalidate_object(const EntityId& object,
                                              const EntityId& except_subject) {
    size_t dropped = 0;
    for (auto it = entries_.begin(); it != entries_.end();) {
        if (it->first != except_subject && it->second.object == object) {
            it = entries_.erase(it);
            ++dropped;
        } else {
            ++it;
        }
    }
    return dropped;
}

bool NetworkRefreshWindow::should_force_retain(const EntityId& network) {
    uint32_t& c = counters_[network];
    if (c >= window_t_) {
        c = 0;
        return true;
    }
    ++c;
    return false;
}

uint32_t NetworkRefreshWindow::counter(const EntityId& network) const {
    auto it = counters_.find(network);
    return it == counters_.end() ? 0 : it->second;
}

CompactionDecision Compactor::skip_or_retain(const EventRecord& e) {
    ++stats_.events_seen;

    // Fork/exit events carry tree structure, not repeatable semantics; they
    // are never skipped and leave the table alone.
    if (is_structural_event(e.etype)) {
        return {CompactionAction::Retain,
                lst_.find(e.subject) ? CompactionReason::SemanticsChanged
                                     : CompactionReason::NewSubject};
    }

    bool forced = false;
    if (e.etype == EventType::Recv) {
        forced = window_.should_force_retain(e.object);
        if (forced) ++stats_.window_refreshes;
    }

    EventSignature sig{e.etype, e.object};
    CompactionReason reason;
    const EventSignature* stored = lst_.find(e.subject);
    if (!stored) {
        lst_.upsert(e.subject, std::move(sig));
        reason = forced ? CompactionReason::WindowRefresh : CompactionReason::NewSubject;
    } else if (*stored == sig && !forced) {
        ++stats_.events_skipped;
        return {CompactionAction::Skip, CompactionReason::RedundantSemantics};
    } else {
        lst_.erase(e.subject);
        lst_.upsert(e.subject, std::move(sig));
        if (e.object.kind == EntityKind::Process) lst_.erase(e.object);
        reason = forced ? CompactionReason::WindowRefresh : CompactionReason::SemanticsChanged;
    }

    if (lst_.size() >= lst_.capacity_threshold()) {
        lst_.clear();
        ++stats_.table_flushes;
        return {CompactionAction::Retain,
                forced ? CompactionReason::WindowRefresh : CompactionReason::TableFlushed};
    }

    if (e.etype == EventType::Write || e.etype == EventType::Recv) {
        size_t dropped = lst_.invalidate_object(e.object, e.subject);
        if (dropped > 0 && !forced && reason == CompactionReason::SemanticsChanged) {
            reason = CompactionReason::WriteInvalidation;
        }
    }
    return {CompactionAction::Retain, reason};
}

namespace {

bool prunable(const ProcessNode& p, LabelSet phf) {
    return p.exited && p.children.empty() && !p.labels.intersects(phf);
}

}  // namespace

PruneOutcome prune_on_exit(GraphStore& store, const EntityId& process, LabelSet phf) {
    PruneOutcome out;
    ProcessNode* node = store.process(process);
    if (!node) throw GraphError("prune: unknown process '" + process.key + "'");
    if (!prunable(*node, phf)) return out;

    std::optional<EntityId> parent = node->parent;
    store.remove_process(process);
    out.pruned = true;

    // An exited interior node becomes prunable once its last child goes;
    // sweep upward so long chains do not leak.
    while (parent && !(*parent == store.virtual_root())) {
        ProcessNode* pn = store.process(*parent);
        if (!pn || !prunable(*pn, phf)) break;
        std::optional<EntityId> next = pn->parent;
        store.remove_process(*parent);
        ++out.cascaded;
        parent = next;
    }
    return out;
}

}  // namespace provwatch
