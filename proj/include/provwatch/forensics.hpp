#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "provwatch/graph.hpp"
#include "provwatch/policy.hpp"

namespace provwatch {

// The forensic subgraph explaining an alert: entities and retained events
// reachable from the origin along time-monotone information flow.
struct AttackChain {
    EntityId origin;
    bool backward = true;
    std::vector<EntityId> entry_points;  // network sources and init-labeled files
    std::set<EntityId> nodes;
    std::vector<EventRecord> edges;  // ts order
    std::map<EntityId, LabelSet> stage_annotations;

    bool contains(const EntityId& id) const { return nodes.count(id) > 0; }
    std::string to_json() const;
    std::string to_dot() const;
};

struct TraceOptions {
    int max_depth = 25;
    bool full = false;  // expand through unlabeled-to-unlabeled edges too
};

// Label-guided breadth-first tracing over the retained edge log. Backward
// chains follow in-flow edges with strictly decreasing timestamps from each
// visit time; forward chains are the symmetric time-increasing traversal.
// Network nodes terminate a branch; init-labeled files are recorded as entry
// points but traversed through (their writers matter).
class Tracer {
public:
    Tracer(GraphStore* store, const Policy* policy, TraceOptions opts = {})
        : store_(store), policy_(policy), opts_(opts) {}

    AttackChain backward_trace(const EntityId& origin, int64_t at);
    AttackChain forward_trace(const EntityId& origin, int64_t from);

private:
    AttackChain trace(const EntityId& origin, int64_t bound, bool backward);
    GraphStore* store_;
    const Policy* policy_;
    TraceOptions opts_;
};

}  // namespace provwatch
