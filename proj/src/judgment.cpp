#include "provwatch/judgment.hpp"

#include "json.hpp"

namespace provwatch {

std::string Alert::to_json() const {
    nlohmann::ordered_json doc;
    doc["ts"] = trigger_ts;
    doc["alert"] = name;
    doc["severity"] = to_string(severity);
    doc["process"] = {{"id", process.key}, {"name", process_name}};
    nlohmann::ordered_json lbls = nlohmann::ordered_json::array();
    for (Label l : labels.to_vector()) lbls.push_back(label_name(l));
    doc["labels"] = std::move(lbls);
    if (!chain_ref.empty()) doc["chain_ref"] = chain_ref;
    return doc.dump();
}

std::vector<Alert> JudgmentEngine::evaluate(const ProcessNode& process, int64_t trigger_ts) {
    std::vector<Alert> out;
    for (size_t i = 0; i < policy_->judgment_rules.size(); ++i) {
        const JudgmentRule& rule = policy_->judgment_rules[i];
        if (!rule.condition.eval(process.labels)) continue;
        if (!realert_ && !fired_.insert({i, process.id}).second) continue;
        Alert a;
        a.name = rule.alert_name;
        a.severity = rule.severity;
        a.process = process.id;
        a.process_name = process.name;
        a.trigger_ts = trigger_ts;
        a.labels = process.labels;
        out.push_back(std::move(a));
    }
    return out;
}

void AlertSink::emit(const Alert& a) {
    if (out_) *out_ << a.to_json() << '\n';
    alerts_.push_back(a);
}

void AlertSink::flush() {
    if (out_) out_->flush();
}

size_t AlertSink::count(const std::string& name) const {
    size_t n = 0;
    for (const auto& a : alerts_) {
        if (a.name == name) ++n;
    }
    return n;
}

size_t AlertSink::apt_count() const {
    size_t n = 0;
    for (const auto& a : alerts_) {
        if (a.severity == Severity::APT) ++n;
    }
    return n;
}

}  // namespace provwatch
