#pragma once

#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "provwatch/graph.hpp"
#include "provwatch/policy.hpp"

namespace provwatch {

struct Alert {
    std::string name;
    Severity severity = Severity::Threat;
    EntityId process;
    std::string process_name;
    int64_t trigger_ts = 0;
    LabelSet labels;        // the process's labels when the rule fired
    std::string chain_ref;  // forensic export path for APT alerts

    std::string to_json() const;
};

// Evaluates the judgment rules against a process's label set after every
// label change. Labels only grow, so a satisfied rule stays satisfied;
// deduplication makes alerting exactly-once per (rule, process).
class JudgmentEngine {
public:
    explicit JudgmentEngine(const Policy* policy, bool realert = false)
        : policy_(policy), realert_(realert) {}

    std::vector<Alert> evaluate(const ProcessNode& process, int64_t trigger_ts);

    const Policy& policy() const { return *policy_; }

private:
    const Policy* policy_;
    bool realert_;
    std::set<std::pair<size_t, EntityId>> fired_;
};

// JSON-lines alert sink with per-name counts.
class AlertSink {
public:
    explicit AlertSink(std::ostream* out) : out_(out) {}

    void emit(const Alert& a);
    void flush();
    const std::vector<Alert>& alerts() const { return alerts_; }
    size_t count(const std::string& name) const;
    size_t apt_count() const;

private:
    std::ostream* out_;
    std::vector<Alert> alerts_;
};

}  // namespace provwatch
