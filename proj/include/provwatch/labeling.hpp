#pragma once

#include "provwatch/graph.hpp"
#include "provwatch/policy.hpp"

namespace provwatch {

// Applies initial labels and propagates labels across retained events per the
// transfer-rule table. One event only ever changes labels on its own subject
// and object; rules are evaluated against a pre-event snapshot of both label
// sets, so the outcome is independent of rule order.
class Labeler {
public:
    explicit Labeler(const Policy* policy) : policy_(policy) {}

    // Pattern-based initial labels for a newly created or renamed entity.
    LabelSet apply_init_rules(GraphStore& store, const EntityId& id, int64_t ts, uint64_t seq);

    struct Propagated {
        LabelSet subject_added;
        LabelSet object_added;
    };

    // Transfer rules plus the built-in derived rules:
    //  - PS1 on any subject performing N0 Connect / N2 Recv
    //  - PS2 on reading a file that carries any high-value label
    //  - PB4 on E3 Execute by a subject already carrying PS4
    //  - PB2 / PB3 on E3 Execute matching the sensitive file/command patterns
    Propagated propagate(GraphStore& store, const EventRecord& e);

    const Policy& policy() const { return *policy_; }

private:
    const Policy* policy_;
};

}  // namespace provwatch
