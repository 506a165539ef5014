#include "provwatch/forensics.hpp"

#include <algorithm>
#include <deque>

#include "json.hpp"

namespace provwatch {

using json = nlohmann::json;

std::string AttackChain::to_json() const {
    json doc;
    doc["origin"] = {{"k", to_wire(origin.kind)}, {"id", origin.key}};
    doc["direction"] = backward ? "backward" : "forward";
    json eps = json::array();
    for (const auto& e : entry_points) eps.push_back({{"k", to_wire(e.kind)}, {"id", e.key}});
    doc["entry_points"] = std::move(eps);
    json ns = json::array();
    for (const auto& n : nodes) {
        json labels = json::array();
        auto it = stage_annotations.find(n);
        if (it != stage_annotations.end()) {
            for (Label l : it->second.to_vector()) labels.push_back(label_name(l));
        }
        ns.push_back({{"k", to_wire(n.kind)}, {"id", n.key}, {"labels", std::move(labels)}});
    }
    doc["nodes"] = std::move(ns);
    json es = json::array();
    for (const auto& e : edges) {
        es.push_back({{"ts", e.ts},
                      {"etype", to_wire(e.etype)},
                      {"subj", e.subject.key},
                      {"obj", e.object.key}});
    }
    doc["edges"] = std::move(es);
    return doc.dump(2);
}

std::string AttackChain::to_dot() const {
    std::string out = "digraph chain {\n";
    auto quote = [](const EntityId& id) {
        std::string s = "\"" + std::string(to_wire(id.kind)) + ":";
        for (char c : id.key) s += (c == '"' ? '\'' : c);
        return s + "\"";
    };
    for (const auto& n : nodes) {
        const char* shape = n.kind == EntityKind::Process ? "ellipse"
                            : n.kind == EntityKind::File  ? "box"
                                                          : "diamond";
        out += "  " + quote(n) + " [shape=" + shape + "];\n";
    }
    for (const auto& e : edges) {
        out += "  " + quote(e.subject) + " -> " + quote(e.object) + " [label=\"" +
               to_wire(e.etype) + " @" + std::to_string(e.ts) + "\"];\n";
    }
    out += "}\n";
    return out;
}

AttackChain Tracer::backward_trace(const EntityId& origin, int64_t at) {
    return trace(origin, at, true);
}

AttackChain Tracer::forward_trace(const EntityId& origin, int64_t from) {
    return trace(origin, from, false);
}

AttackChain Tracer::trace(const EntityId& origin, int64_t bound, bool backward) {
    EntityId start = store_->resolve(origin);
    if (!store_->known(start)) throw GraphError("trace: unknown entity '" + origin.key + "'");

    AttackChain chain;
    chain.origin = start;
    chain.backward = backward;
    chain.nodes.insert(start);

    const LabelSet entry_labels = policy_->init_labels();
    auto labeled = [&](const EntityId& id) { return !store_->entity_labels(id).empty(); };
    auto note = [&](const EntityId& id) {
        chain.nodes.insert(id);
        LabelSet ls = store_->entity_labels(id);
        if (!ls.empty()) chain.stage_annotations[id] = ls;
    };
    note(start);

    struct Visit {
        EntityId id;
        int64_t at;
        int depth;
    };
    std::deque<Visit> queue;
    std::set<EntityId> visited;
    queue.push_back({start, bound, 0});
    visited.insert(start);

    while (!queue.empty()) {
        Visit v = queue.front();
        queue.pop_front();
        if (v.depth >= opts_.max_depth) continue;
        if (v.id.kind == EntityKind::Network && !(v.id == start)) continue;  // terminal source

        auto refs = backward ? store_->neighbors(v.id, GraphStore::Direction::In, v.at)
                             : store_->neighbors(v.id, GraphStore::Direction::Out, v.at);
        for (const auto& ref : refs) {
            EntityId other = store_->resolve(ref.other);
            if (!opts_.full && !labeled(v.id) && !labeled(other)) continue;
            chain.edges.push_back(*ref.event);
            note(other);
            if (other.kind == EntityKind::Network ||
                (other.kind == EntityKind::File &&
                 store_->entity_labels(other).intersects(entry_labels))) {
                if (std::find(chain.entry_points.begin(), chain.entry_points.end(), other) ==
                    chain.entry_points.end()) {
                    chain.entry_points.push_back(other);
                }
            }
            if (visited.insert(other).second) {
                queue.push_back({other, ref.event->ts, v.depth + 1});
            }
        }
    }

    std::sort(chain.edges.begin(), chain.edges.end(),
              [](const EventRecord& a, const EventRecord& b) {
                  return a.ts != b.ts ? a.ts < b.ts : a.seq < b.seq;
              });
    chain.edges.erase(std::unique(chain.edges.begin(), chain.edges.end(),
                                  [](const EventRecord& a, const EventRecord& b) {
                                      return a.seq == b.seq && a.ts == b.ts;
                                  }),
                      chain.edges.end());
    return chain;
}

}  // namespace provwatch
