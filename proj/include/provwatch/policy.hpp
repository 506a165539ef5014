#pragma once

#include <regex>
#include <stdexcept>
#include <string>
#include <vector>

#include "provwatch/event.hpp"
#include "provwatch/labels.hpp"

namespace provwatch {

enum class Severity : uint8_t { Threat, APT };

const char* to_string(Severity s);

// Pattern-based initial label assignment, applied when an entity is first
// seen or renamed. Patterns are anchored (full match against name/path).
struct InitRule {
    EntityKind target = EntityKind::File;
    std::string pattern_text;
    std::regex pattern;
    Label label = Label::FU1;

    bool matches(const std::string& name) const { return std::regex_match(name, pattern); }
};

// Label flow direction along an event: D carries a process label forward onto
// the file object, R carries a file label back onto the subject process.
enum class Direction : uint8_t { D, R };

struct TransferRule {
    LabelSet process_labels;  // label 1 (any-of; singleton for all but the FH5 row)
    uint32_t event_mask = 0;  // event_bit() union
    Label file_label = Label::FU2;  // label 2
    Direction direction = Direction::D;
    std::string text;  // source line, for diagnostics

    bool applies_to(EventType t) const { return event_mask & event_bit(t); }
};

// Boolean condition over a process's label set, stored as a postfix program.
class Condition {
public:
    static Condition parse(const std::string& expr);  // throws PolicyError

    bool eval(LabelSet labels) const;
    LabelSet referenced() const;
    const std::string& text() const { return text_; }

private:
    enum class OpCode : uint8_t { PushLabel, And, Or };
    struct Op {
        OpCode code;
        Label label;  // valid for PushLabel
    };
    std::vector<Op> ops_;
    std::string text_;
};

struct JudgmentRule {
    std::string alert_name;
    Severity severity = Severity::Threat;
    Condition condition;
};

struct PolicyError : std::runtime_error {
    enum class Kind { ParseError, UnknownLabel, UnknownEventType };
    Kind kind;
    PolicyError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

// Declarative detection policy: the shipped default reproduces the standard
// label/transfer/judgment tables; deployments may override any section.
struct Policy {
    std::vector<InitRule> init_rules;
    std::vector<TransferRule> transfer_rules;
    LabelSet phf;  // labels that veto process pruning
    std::vector<JudgmentRule> judgment_rules;

    // Sensitive executable / command-line patterns (drive PB2 / PB3).
    std::vector<InitRule> sensitive_files;     // matched against E3 object path
    std::vector<std::pair<std::string, std::regex>> sensitive_commands;  // against args

    // Labels assignable by init rules; init-labeled files are forensic entry
    // points.
    LabelSet init_labels() const;

    static Policy built_in();
    static Policy parse(const std::string& text);     // throws PolicyError
    static Policy load_file(const std::string& path); // throws PolicyError
    static const char* default_text();
};

}  // namespace provwatch
