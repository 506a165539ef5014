#include "provwatch/labeling.hpp"

namespace provwatch {

LabelSet Labeler::apply_init_rules(GraphStore& store, const EntityId& id, int64_t ts,
                                   uint64_t seq) {
    LabelSet added;
    if (id.kind == EntityKind::Process) {
        ProcessNode* p = store.process(id);
        if (!p) return added;
        for (const auto& rule : policy_->init_rules) {
            if (rule.target != EntityKind::Process) continue;
            if (rule.matches(p->name) && add_label(*p, rule.label, ts, seq)) added.add(rule.label);
        }
    } else if (id.kind == EntityKind::File) {
        FileNode* f = store.file(id);
        if (!f) return added;
        for (const auto& rule : policy_->init_rules) {
            if (rule.target != EntityKind::File) continue;
            if (rule.matches(f->path) && add_label(*f, rule.label, ts, seq)) added.add(rule.label);
        }
    }
    return added;
}

Labeler::Propagated Labeler::propagate(GraphStore& store, const EventRecord& e) {
    Propagated out;
    ProcessNode* subj = store.process(e.subject);
    if (!subj) return out;
    FileNode* obj_file = e.object.kind == EntityKind::File ? store.file(e.object) : nullptr;

    // pre-event snapshots; additions apply after all rules have been consulted
    const LabelSet subj_before = subj->labels;
    const LabelSet file_before = obj_file ? obj_file->labels : LabelSet{};
    LabelSet subj_add;
    LabelSet file_add;

    for (const auto& rule : policy_->transfer_rules) {
        if (!rule.applies_to(e.etype)) continue;
        if (rule.direction == Direction::D) {
            if (obj_file && subj_before.intersects(rule.process_labels)) {
                file_add.add(rule.file_label);
            }
        } else {
            if (obj_file && file_before.has(rule.file_label)) {
                subj_add |= rule.process_labels;
            }
        }
    }

    // derived rules
    if (e.etype == EventType::Connect || e.etype == EventType::Recv) {
        subj_add.add(Label::PS1);
    }
    if (e.etype == EventType::Read && file_before.intersects(LabelSet::high_value_mask())) {
        subj_add.add(Label::PS2);
    }
    if (e.etype == EventType::Execute) {
        if (subj_before.has(Label::PS4)) subj_add.add(Label::PB4);
        if (obj_file) {
            for (const auto& rule : policy_->sensitive_files) {
                if (rule.matches(obj_file->path)) { subj_add.add(Label::PB2); break; }
            }
        }
        if (!e.args.empty()) {
            for (const auto& [text, re] : policy_->sensitive_commands) {
                if (std::regex_match(e.args, re)) { subj_add.add(Label::PB3); break; }
            }
        }
    }

    for (Label l : subj_add.to_vector()) {
        if (add_label(*subj, l, e.ts, e.seq)) out.subject_added.add(l);
    }
    if (obj_file) {
        for (Label l : file_add.to_vector()) {
            if (add_label(*obj_file, l, e.ts, e.seq)) out.object_added.add(l);
        }
    }
    return out;
}

}  // namespace provwatch
