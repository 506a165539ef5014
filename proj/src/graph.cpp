#include "provwatch/graph.hpp"

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>

#include "json.hpp"

namespace provwatch {

using json = nlohmann::json;

bool add_label(ProcessNode& n, Label l, int64_t ts, uint64_t cause_seq) {
    if (n.labels.has(l)) return false;
    n.labels.add(l);
    n.evidence.push_back({l, ts, cause_seq});
    return true;
}

bool add_label(FileNode& n, Label l, int64_t ts, uint64_t cause_seq) {
    if (n.labels.has(l)) return false;
    n.labels.add(l);
    n.evidence.push_back({l, ts, cause_seq});
    return true;
}

// ---------------------------------------------------------------------------
// EdgeLog

void EdgeLog::append(const EventRecord& e) {
    uint32_t idx = static_cast<uint32_t>(edges_.size());
    const EntityId& src = flow_source(e);
    const EntityId& dst = flow_target(e);
    edges_.emplace_back(e);
    ++live_count_;
    incidence_[src].out.push_back(idx);
    if (!(src == dst)) incidence_[dst].in.push_back(idx);
}

void EdgeLog::drop_entity(const EntityId& id) {
    auto it = incidence_.find(id);
    if (it == incidence_.end()) return;
    for (uint32_t idx : it->second.in) {
        if (edges_[idx]) { edges_[idx].reset(); --live_count_; }
    }
    for (uint32_t idx : it->second.out) {
        if (edges_[idx]) { edges_[idx].reset(); --live_count_; }
    }
    incidence_.erase(it);
}

void EdgeLog::rekey(const EntityId& from, const EntityId& to) {
    auto it = incidence_.find(from);
    if (it == incidence_.end()) return;
    Incidence moved = std::move(it->second);
    incidence_.erase(it);
    Incidence& dst = incidence_[to];
    dst.in.insert(dst.in.end(), moved.in.begin(), moved.in.end());
    dst.out.insert(dst.out.end(), moved.out.begin(), moved.out.end());
}

std::vector<EdgeLog::EdgeRef> EdgeLog::in_edges(const EntityId& id, int64_t before) const {
    std::vector<EdgeRef> out;
    auto it = incidence_.find(id);
    if (it == incidence_.end()) return out;
    for (uint32_t idx : it->second.in) {
        const auto& slot = edges_[idx];
        if (slot && slot->ts < before) out.push_back({&*slot, flow_source(*slot)});
    }
    return out;
}

std::vector<EdgeLog::EdgeRef> EdgeLog::out_edges(const EntityId& id, int64_t after) const {
    std::vector<EdgeRef> out;
    auto it = incidence_.find(id);
    if (it == incidence_.end()) return out;
    for (uint32_t idx : it->second.out) {
        const auto& slot = edges_[idx];
        if (slot && slot->ts > after) out.push_back({&*slot, flow_target(*slot)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// OffloadStore

OffloadStore::OffloadStore(std::string path) : path_(std::move(path)) {}

OffloadStore::~OffloadStore() {
    if (io_.is_open()) io_.close();
    if (owns_file_ && !path_.empty()) {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }
}

void OffloadStore::ensure_open() {
    if (io_.is_open()) return;
    if (path_.empty()) {
        auto dir = std::filesystem::temp_directory_path();
        path_ = (dir / ("provwatch-offload-" + std::to_string(::getpid()) + "-" +
                        std::to_string(reinterpret_cast<uintptr_t>(this)) + ".jsonl"))
                    .string();
        owns_file_ = true;
    }
    io_.open(path_, std::ios::in | std::ios::out | std::ios::trunc);
    if (!io_) throw GraphError("offload store: cannot open '" + path_ + "'");
}

void OffloadStore::put(const FileNode& node) {
    ensure_open();
    json doc;
    doc["id"] = node.id.key;
    doc["path"] = node.path;
    doc["last_active_ts"] = node.last_active_ts;
    doc["deleted"] = node.deleted;
    doc["aliases"] = node.aliases;
    json ev = json::array();
    for (const auto& e : node.evidence) {
        ev.push_back({{"l", label_name(e.label)}, {"ts", e.ts}, {"seq", e.cause_seq}});
    }
    doc["evidence"] = std::move(ev);
    json labels = json::array();
    for (Label l : node.labels.to_vector()) labels.push_back(label_name(l));
    doc["labels"] = std::move(labels);

    io_.clear();
    io_.seekp(0, std::ios::end);
    std::streamoff offset = io_.tellp();
    io_ << doc.dump() << '\n';
    io_.flush();
    if (!io_) throw GraphError("offload store full: write failed at '" + path_ + "'");
    index_[node.id] = offset;
}

FileNode OffloadStore::get(const EntityId& id) {
    auto it = index_.find(id);
    if (it == index_.end()) throw GraphError("offload store: unknown file '" + id.key + "'");
    io_.clear();
    io_.seekg(it->second);
    std::string line;
    if (!std::getline(io_, line)) throw GraphError("offload store: read failed for '" + id.key + "'");
    json doc = json::parse(line);
    FileNode node;
    node.id = id;
    node.path = doc["path"].get<std::string>();
    node.last_active_ts = doc["last_active_ts"].get<int64_t>();
    node.deleted = doc["deleted"].get<bool>();
    node.aliases = doc["aliases"].get<std::vector<std::string>>();
    for (const auto& e : doc["evidence"]) {
        auto l = label_from_name(e["l"].get<std::string>());
        node.evidence.push_back({*l, e["ts"].get<int64_t>(), e["seq"].get<uint64_t>()});
    }
    for (const auto& l : doc["labels"]) {
        node.labels.add(*label_from_name(l.get<std::string>()));
    }
    return node;
}

// ---------------------------------------------------------------------------
// GraphStore

GraphStore::GraphStore(std::string offload_path)
    : root_id_(process_id("virtual-root")), offload_(std::move(offload_path)) {
    ProcessNode root;
    root.id = root_id_;
    root.name = "<virtual-root>";
    processes_.emplace(root_id_, std::move(root));
}

ProcessNode& GraphStore::ensure_process(const EntityId& id, const std::string& name, int64_t ts,
                                        ApplyResult* r) {
    auto it = processes_.find(id);
    if (it != processes_.end()) return it->second;
    ProcessNode node;
    node.id = id;
    node.name = name;
    node.parent = root_id_;
    node.created_ts = ts;
    node.last_active_ts = ts;
    auto [ins, _] = processes_.emplace(id, std::move(node));
    processes_[root_id_].children.push_back(id);
    ++processes_total_;
    if (r) r->init_targets.push_back(id);
    note_peak();
    return ins->second;
}

FileNode& GraphStore::ensure_file(const EntityId& id, const std::string& name, int64_t ts,
                                  ApplyResult* r) {
    EntityId key = resolve(id);
    auto it = files_.find(key);
    if (it != files_.end()) return it->second;
    if (offload_.contains(key)) {
        FileNode node = offload_.get(key);
        offload_.erase(key);
        auto [ins, _] = files_.emplace(key, std::move(node));
        note_peak();
        return ins->second;
    }
    FileNode node;
    node.id = key;
    node.path = name.empty() ? key.key : name;
    node.last_active_ts = ts;
    auto [ins, _] = files_.emplace(key, std::move(node));
    ++files_total_;
    if (r) r->init_targets.push_back(key);
    note_peak();
    return ins->second;
}

NetworkNode& GraphStore::ensure_network(const EntityId& id, const std::string& name, int64_t ts) {
    auto it = networks_.find(id);
    if (it != networks_.end()) return it->second;
    NetworkNode node;
    node.id = id;
    node.endpoint = name.empty() ? id.key : name;
    node.last_active_ts = ts;
    auto [ins, _] = networks_.emplace(id, std::move(node));
    note_peak();
    return ins->second;
}

void GraphStore::fork_inherit(ProcessNode& parent, ProcessNode& child, const EventRecord& cause) {
    for (Label l : parent.status_labels().to_vector()) {
        add_label(child, l, cause.ts, cause.seq);
    }
}

void GraphStore::rename_file(const EntityId& from, const std::string& to_path, int64_t ts,
                             ApplyResult* r) {
    EntityId old_key = resolve(from);
    EntityId new_key = file_id(to_path);
    if (old_key == new_key) return;
    auto it = files_.find(old_key);
    if (it == files_.end()) return;
    FileNode node = std::move(it->second);
    files_.erase(it);
    node.aliases.push_back(node.path);
    node.path = to_path;
    node.id = new_key;
    node.last_active_ts = ts;
    files_[new_key] = std::move(node);
    file_aliases_[old_key] = new_key;
    edge_log_.rekey(old_key, new_key);
    if (r) r->init_targets.push_back(new_key);  // new name may match init patterns
}

GraphStore::ApplyResult GraphStore::apply_event(const EventRecord& e) {
    ApplyResult r;
    ProcessNode& subj = ensure_process(e.subject, e.subject_name, e.ts, &r);
    subj.last_active_ts = e.ts;
    edge_log_.append(e);  // before any rename re-key so the edge moves with the file

    switch (e.object.kind) {
        case EntityKind::Process: {
            if (e.etype == EventType::Fork || e.etype == EventType::ForkSharedFd) {
                bool fresh = processes_.find(e.object) == processes_.end();
                ProcessNode& child = ensure_process(e.object, e.object_name, e.ts, &r);
                if (fresh) {
                    // re-link from the virtual root to the real parent
                    auto& root_children = processes_[root_id_].children;
                    root_children.erase(std::remove(root_children.begin(), root_children.end(), e.object),
                                        root_children.end());
                    child.parent = e.subject;
                    processes_[e.subject].children.push_back(e.object);
                    fork_inherit(processes_[e.subject], child, e);
                    r.forked = true;
                    r.fork_child = e.object;
                }
                child.last_active_ts = e.ts;
            } else if (!(e.object == e.subject)) {
                ensure_process(e.object, e.object_name, e.ts, &r).last_active_ts = e.ts;
            }
            break;
        }
        case EntityKind::File: {
            FileNode& f = ensure_file(e.object, e.object_name, e.ts, &r);
            f.last_active_ts = e.ts;
            if (e.etype == EventType::Delete) f.deleted = true;
            if (e.etype == EventType::Rename && !e.args.empty()) {
                rename_file(e.object, e.args, e.ts, &r);
            }
            break;
        }
        case EntityKind::Network: {
            ensure_network(e.object, e.object_name, e.ts).last_active_ts = e.ts;
            break;
        }
    }

    if (e.etype == EventType::Execute && e.object.kind == EntityKind::File) {
        ProcessNode& s = processes_[e.subject];
        if (s.name != e.object.key) {
            s.name = e.object.key;
            r.subject_renamed = true;
        }
    }
    if (e.etype == EventType::Exit) {
        ProcessNode& s = processes_[e.subject];
        if (!s.exited && s.created_ts == e.ts &&
            std::find(r.init_targets.begin(), r.init_targets.end(), e.subject) != r.init_targets.end()) {
            r.unknown_exit = true;
            ++unknown_exits_;
        }
        s.exited = true;
    }

    return r;
}

ProcessNode* GraphStore::process(const EntityId& id) {
    auto it = processes_.find(id);
    return it == processes_.end() ? nullptr : &it->second;
}

const ProcessNode* GraphStore::process(const EntityId& id) const {
    auto it = processes_.find(id);
    return it == processes_.end() ? nullptr : &it->second;
}

FileNode* GraphStore::file(const EntityId& id) {
    EntityId key = resolve(id);
    auto it = files_.find(key);
    if (it != files_.end()) return &it->second;
    if (offload_.contains(key)) {
        FileNode node = offload_.get(key);
        offload_.erase(key);
        auto [ins, _] = files_.emplace(key, std::move(node));
        note_peak();
        return &ins->second;
    }
    return nullptr;
}

bool GraphStore::file_offloaded(const EntityId& id) const { return offload_.contains(resolve(id)); }

NetworkNode* GraphStore::network(const EntityId& id) {
    auto it = networks_.find(id);
    return it == networks_.end() ? nullptr : &it->second;
}

LabelSet GraphStore::entity_labels(const EntityId& id) {
    switch (id.kind) {
        case EntityKind::Process: {
            auto* p = process(id);
            return p ? p->labels : LabelSet{};
        }
        case EntityKind::File: {
            auto* f = file(id);
            return f ? f->labels : LabelSet{};
        }
        case EntityKind::Network:
            return {};
    }
    return {};
}

EntityId GraphStore::resolve(const EntityId& id) const {
    if (id.kind != EntityKind::File) return id;
    EntityId cur = id;
    for (int hops = 0; hops < 64; ++hops) {
        auto it = file_aliases_.find(cur);
        if (it == file_aliases_.end()) return cur;
        cur = it->second;
    }
    return cur;
}

bool GraphStore::known(const EntityId& id) const {
    switch (id.kind) {
        case EntityKind::Process:
            return processes_.count(id) > 0;
        case EntityKind::File: {
            EntityId key = resolve(id);
            return files_.count(key) > 0 || offload_.contains(key);
        }
        case EntityKind::Network:
            return networks_.count(id) > 0;
    }
    return false;
}

void GraphStore::remove_process(const EntityId& id) {
    if (id == root_id_) throw GraphError("cannot remove the virtual root");
    auto it = processes_.find(id);
    if (it == processes_.end()) throw GraphError("unknown process '" + id.key + "'");
    if (!it->second.children.empty()) throw GraphError("process '" + id.key + "' still has children");
    if (it->second.parent) {
        auto pit = processes_.find(*it->second.parent);
        if (pit != processes_.end()) {
            auto& siblings = pit->second.children;
            siblings.erase(std::remove(siblings.begin(), siblings.end(), id), siblings.end());
        }
    }
    edge_log_.drop_entity(id);
    processes_.erase(it);
    pruned_ids_.push_back(id);
}

size_t GraphStore::offload_inactive(int64_t now_ts, int64_t threshold_ns) {
    std::vector<EntityId> to_offload;
    std::vector<EntityId> to_drop;
    for (const auto& [id, node] : files_) {
        if (node.deleted && node.labels.empty()) {
            to_drop.push_back(id);
        } else if (now_ts - node.last_active_ts > threshold_ns) {
            to_offload.push_back(id);
        }
    }
    for (const auto& id : to_drop) files_.erase(id);
    for (const auto& id : to_offload) {
        offload_.put(files_[id]);
        files_.erase(id);
    }
    return to_offload.size();
}

std::vector<EdgeLog::EdgeRef> GraphStore::neighbors(const EntityId& id, Direction dir,
                                                    int64_t bound) {
    EntityId key = resolve(id);
    if (!known(key)) throw GraphError("unknown entity '" + id.key + "'");
    if (key.kind == EntityKind::File) file(key);  // reload before answering
    return dir == Direction::In ? edge_log_.in_edges(key, bound) : edge_log_.out_edges(key, bound);
}

size_t GraphStore::resident_entities() const {
    return (processes_.size() - 1) + files_.size() + networks_.size();
}

void GraphStore::note_peak() { peak_resident_ = std::max(peak_resident_, resident_entities()); }

void GraphStore::set_window_mirror(const EntityId& net, uint32_t counter) {
    auto it = networks_.find(net);
    if (it != networks_.end()) it->second.refresh_counter = counter;
}

std::vector<std::string> GraphStore::check_tree() const {
    std::vector<std::string> problems;
    for (const auto& [id, node] : processes_) {
        if (id == root_id_) continue;
        if (!node.parent) {
            problems.push_back("process " + id.key + " has no parent");
            continue;
        }
        auto pit = processes_.find(*node.parent);
        if (pit == processes_.end()) {
            problems.push_back("process " + id.key + " has dangling parent " + node.parent->key);
            continue;
        }
        const auto& siblings = pit->second.children;
        if (std::find(siblings.begin(), siblings.end(), id) == siblings.end()) {
            problems.push_back("process " + id.key + " missing from parent's child list");
        }
    }
    for (const auto& [id, node] : processes_) {
        for (const auto& c : node.children) {
            if (!processes_.count(c)) {
                problems.push_back("process " + id.key + " lists dangling child " + c.key);
            }
        }
    }
    // reachability from the virtual root
    std::set<EntityId> seen;
    std::vector<EntityId> stack{root_id_};
    while (!stack.empty()) {
        EntityId cur = stack.back();
        stack.pop_back();
        if (!seen.insert(cur).second) continue;
        auto it = processes_.find(cur);
        if (it == processes_.end()) continue;
        for (const auto& c : it->second.children) stack.push_back(c);
    }
    for (const auto& [id, node] : processes_) {
        if (!seen.count(id)) problems.push_back("process " + id.key + " unreachable from root");
    }
    return problems;
}

namespace {
json labels_json(LabelSet set) {
    json arr = json::array();
    for (Label l : set.to_vector()) arr.push_back(label_name(l));
    return arr;
}
}  // namespace

void GraphStore::dump_json(std::ostream& out) const {
    json doc;
    json procs = json::array();
    std::map<EntityId, const ProcessNode*> sorted_p;
    for (const auto& [id, node] : processes_) sorted_p[id] = &node;
    for (const auto& [id, node] : sorted_p) {
        json p;
        p["id"] = id.key;
        p["name"] = node->name;
        p["parent"] = node->parent ? node->parent->key : "";
        p["exited"] = node->exited;
        p["labels"] = labels_json(node->labels);
        procs.push_back(std::move(p));
    }
    doc["processes"] = std::move(procs);

    json files = json::array();
    std::map<EntityId, const FileNode*> sorted_f;
    for (const auto& [id, node] : files_) sorted_f[id] = &node;
    for (const auto& [id, node] : sorted_f) {
        json f;
        f["path"] = node->path;
        f["deleted"] = node->deleted;
        f["labels"] = labels_json(node->labels);
        files.push_back(std::move(f));
    }
    doc["files"] = std::move(files);

    json nets = json::array();
    std::map<EntityId, const NetworkNode*> sorted_n;
    for (const auto& [id, node] : networks_) sorted_n[id] = &node;
    for (const auto& [id, node] : sorted_n) {
        nets.push_back({{"endpoint", node->endpoint}, {"refresh_counter", node->refresh_counter}});
    }
    doc["networks"] = std::move(nets);

    json edges = json::array();
    edge_log_.for_each([&](const EventRecord& e) {
        edges.push_back({{"ts", e.ts},
                         {"etype", to_wire(e.etype)},
                         {"subj", e.subject.key},
                         {"obj", e.object.key}});
    });
    doc["edges"] = std::move(edges);
    out << doc.dump(2) << '\n';
}

void GraphStore::dump_dot(std::ostream& out) const {
    out << "digraph provenance {\n";
    auto node_name = [](const EntityId& id) {
        std::string n = "\"";
        for (char c : id.key) n += (c == '"' ? '\'' : c);
        return n + "\"";
    };
    for (const auto& [id, node] : processes_) {
        if (id == root_id_) continue;
        out << "  " << node_name(id) << " [shape=ellipse label=\"" << node.name << "\"];\n";
    }
    for (const auto& [id, node] : files_) {
        out << "  " << node_name(id) << " [shape=box label=\"" << node.path << "\"];\n";
    }
    for (const auto& [id, node] : networks_) {
        out << "  " << node_name(id) << " [shape=diamond label=\"" << node.endpoint << "\"];\n";
    }
    edge_log_.for_each([&](const EventRecord& e) {
        out << "  " << node_name(e.subject) << " -> " << node_name(e.object) << " [label=\""
            << to_wire(e.etype) << " @" << e.ts << "\"];\n";
    });
    out << "}\n";
}

}  // namespace provwatch
