#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "provwatch/event.hpp"
#include "provwatch/labels.hpp"

namespace provwatch {

struct GraphError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ProcessNode {
    EntityId id;
    std::string name;  // current image path
    std::optional<EntityId> parent;
    std::vector<EntityId> children;
    LabelSet labels;
    std::vector<LabelEvidence> evidence;
    bool exited = false;
    int64_t created_ts = 0;
    int64_t last_active_ts = 0;

    LabelSet status_labels() const { return labels & LabelSet::status_mask(); }
};

struct FileNode {
    EntityId id;
    std::string path;
    LabelSet labels;
    std::vector<LabelEvidence> evidence;
    int64_t last_active_ts = 0;
    bool deleted = false;
    std::vector<std::string> aliases;  // prior paths, oldest first
};

struct NetworkNode {
    EntityId id;
    std::string endpoint;
    uint32_t refresh_counter = 0;  // mirror of the compactor's window counter
    int64_t last_active_ts = 0;
};

// Adds a label with its forensic evidence; returns true when newly set.
bool add_label(ProcessNode& n, Label l, int64_t ts, uint64_t cause_seq);
bool add_label(FileNode& n, Label l, int64_t ts, uint64_t cause_seq);

// Append-only log of retained events with per-entity incidence indexed by
// information-flow direction. Pruning an entity clears its slots.
class EdgeLog {
public:
    void append(const EventRecord& e);
    void drop_entity(const EntityId& id);
    void rekey(const EntityId& from, const EntityId& to);

    // Edges flowing into / out of an entity, in append (time) order.
    struct EdgeRef {
        const EventRecord* event;
        EntityId other;  // the far flow endpoint
    };
    std::vector<EdgeRef> in_edges(const EntityId& id, int64_t before) const;
    std::vector<EdgeRef> out_edges(const EntityId& id, int64_t after) const;

    size_t size() const { return live_count_; }
    size_t slots() const { return edges_.size(); }
    template <typename Fn>
    void for_each(Fn&& fn) const {
        for (const auto& e : edges_) {
            if (e) fn(*e);
        }
    }

private:
    struct Incidence {
        std::vector<uint32_t> in;
        std::vector<uint32_t> out;
    };
    std::vector<std::optional<EventRecord>> edges_;
    std::unordered_map<EntityId, Incidence, EntityIdHash> incidence_;
    size_t live_count_ = 0;
};

// Disk spill for inactive file nodes: an append-only JSON-lines file plus an
// in-memory index of the latest offset per file id.
class OffloadStore {
public:
    explicit OffloadStore(std::string path = "");
    ~OffloadStore();
    OffloadStore(const OffloadStore&) = delete;
    OffloadStore& operator=(const OffloadStore&) = delete;

    void put(const FileNode& node);       // throws GraphError when the store is full/unwritable
    FileNode get(const EntityId& id);
    bool contains(const EntityId& id) const { return index_.count(id) > 0; }
    void erase(const EntityId& id) { index_.erase(id); }
    size_t size() const { return index_.size(); }
    const std::string& path() const { return path_; }

private:
    void ensure_open();
    std::string path_;
    bool owns_file_ = false;
    std::fstream io_;
    std::unordered_map<EntityId, std::streamoff, EntityIdHash> index_;
};

// The live dependency graph: process tree under a virtual root, file and
// network tables, and the retained-event edge log.
class GraphStore {
public:
    explicit GraphStore(std::string offload_path = "");

    struct ApplyResult {
        std::vector<EntityId> init_targets;  // created or renamed: need init rules
        bool subject_renamed = false;        // E3 changed the subject's image
        bool forked = false;
        EntityId fork_child;
        bool unknown_exit = false;  // exit synthesized a never-seen process
    };

    // Applies one retained event: creates entities on first sight, links the
    // process tree, inherits status labels across fork, marks exits, re-keys
    // renames, touches activity stamps, and appends to the edge log.
    ApplyResult apply_event(const EventRecord& e);

    ProcessNode* process(const EntityId& id);
    const ProcessNode* process(const EntityId& id) const;
    FileNode* file(const EntityId& id);  // transparently reloads offloaded nodes
    NetworkNode* network(const EntityId& id);
    bool file_offloaded(const EntityId& id) const;
    LabelSet entity_labels(const EntityId& id);  // reloads files if needed

    // Copies the parent's status labels onto a freshly forked child.
    void fork_inherit(ProcessNode& parent, ProcessNode& child, const EventRecord& cause);

    // Removes a process node and its edges. Throws GraphError on the virtual
    // root or a process with live children.
    void remove_process(const EntityId& id);

    // Moves file nodes inactive for longer than threshold_ns to the offload
    // store and drops unlabeled deleted files. Returns the offload count.
    size_t offload_inactive(int64_t now_ts, int64_t threshold_ns);

    enum class Direction { In, Out };
    std::vector<EdgeLog::EdgeRef> neighbors(const EntityId& id, Direction dir, int64_t bound);

    const EntityId& virtual_root() const { return root_id_; }
    EntityId resolve(const EntityId& id) const;  // follows file rename aliases
    bool known(const EntityId& id) const;

    const EdgeLog& edges() const { return edge_log_; }

    // Counters for the stats report.
    size_t processes_total() const { return processes_total_; }
    size_t processes_pruned() const { return pruned_ids_.size(); }
    size_t files_total() const { return files_total_; }
    size_t files_offloaded_now() const { return offload_.size(); }
    size_t networks_total() const { return networks_.size(); }
    size_t resident_entities() const;
    size_t peak_resident_entities() const { return peak_resident_; }
    size_t unknown_exits() const { return unknown_exits_; }
    const std::vector<EntityId>& pruned_ids() const { return pruned_ids_; }

    void set_window_mirror(const EntityId& net, uint32_t counter);

    // Checks parent/child link consistency and root reachability; returns a
    // list of violations (empty when the tree is intact).
    std::vector<std::string> check_tree() const;

    void dump_json(std::ostream& out) const;
    void dump_dot(std::ostream& out) const;

    template <typename Fn>
    void for_each_process(Fn&& fn) const {
        for (const auto& [id, node] : processes_) {
            if (id == root_id_) continue;
            fn(node);
        }
    }

private:
    ProcessNode& ensure_process(const EntityId& id, const std::string& name, int64_t ts,
                                ApplyResult* r);
    FileNode& ensure_file(const EntityId& id, const std::string& name, int64_t ts, ApplyResult* r);
    NetworkNode& ensure_network(const EntityId& id, const std::string& name, int64_t ts);
    void rename_file(const EntityId& from, const std::string& to_path, int64_t ts, ApplyResult* r);
    void note_peak();

    EntityId root_id_;
    std::unordered_map<EntityId, ProcessNode, EntityIdHash> processes_;
    std::unordered_map<EntityId, FileNode, EntityIdHash> files_;
    std::unordered_map<EntityId, NetworkNode, EntityIdHash> networks_;
    std::unordered_map<EntityId, EntityId, EntityIdHash> file_aliases_;
    EdgeLog edge_log_;
    OffloadStore offload_;

    size_t processes_total_ = 0;
    size_t files_total_ = 0;
    size_t peak_resident_ = 0;
    size_t unknown_exits_ = 0;
    std::vector<EntityId> pruned_ids_;
};

}  // namespace provwatch
