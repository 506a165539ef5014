#include "provwatch/policy.hpp"

#include <fstream>
#include <sstream>

namespace provwatch {

const char* to_string(Severity s) { return s == Severity::APT ? "APT" : "Threat"; }

namespace {

[[noreturn]] void parse_fail(const std::string& msg) {
    throw PolicyError(PolicyError::Kind::ParseError, "policy: " + msg);
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

Label need_label(const std::string& name) {
    auto l = label_from_name(name);
    if (!l) throw PolicyError(PolicyError::Kind::UnknownLabel, "policy: unknown label '" + name + "'");
    return *l;
}

std::regex compile_pattern(const std::string& text) {
    try {
        return std::regex(text, std::regex::ECMAScript | std::regex::optimize);
    } catch (const std::regex_error& e) {
        parse_fail("bad pattern '" + text + "': " + e.what());
    }
}

}  // namespace

Condition Condition::parse(const std::string& expr) {
    // Grammar: or := and ('|' and)* ; and := atom ('&' atom)* ; atom := LABEL | '(' or ')'
    struct Parser {
        const std::string& s;
        size_t pos = 0;
        std::vector<Op>& ops;

        void skip_ws() {
            while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
        }
        bool eat(char c) {
            skip_ws();
            if (pos < s.size() && s[pos] == c) { ++pos; return true; }
            return false;
        }
        void parse_or() {
            parse_and();
            while (eat('|')) {
                parse_and();
                ops.push_back({OpCode::Or, Label::PS1});
            }
        }
        void parse_and() {
            parse_atom();
            while (eat('&')) {
                parse_atom();
                ops.push_back({OpCode::And, Label::PS1});
            }
        }
        void parse_atom() {
            skip_ws();
            if (eat('(')) {
                parse_or();
                if (!eat(')')) parse_fail("expected ')' in condition '" + s + "'");
                return;
            }
            size_t start = pos;
            while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])))) ++pos;
            if (start == pos) parse_fail("expected label in condition '" + s + "'");
            ops.push_back({OpCode::PushLabel, need_label(s.substr(start, pos - start))});
        }
    };

    Condition c;
    c.text_ = expr;
    Parser p{expr, 0, c.ops_};
    p.parse_or();
    p.skip_ws();
    if (p.pos != expr.size()) parse_fail("trailing content in condition '" + expr + "'");
    return c;
}

bool Condition::eval(LabelSet labels) const {
    bool stack[32];
    size_t top = 0;
    for (const Op& op : ops_) {
        switch (op.code) {
            case OpCode::PushLabel:
                stack[top++] = labels.has(op.label);
                break;
            case OpCode::And:
                --top;
                stack[top - 1] = stack[top - 1] && stack[top];
                break;
            case OpCode::Or:
                --top;
                stack[top - 1] = stack[top - 1] || stack[top];
                break;
        }
    }
    return top == 1 && stack[0];
}

LabelSet Condition::referenced() const {
    LabelSet out;
    for (const Op& op : ops_) {
        if (op.code == OpCode::PushLabel) out.add(op.label);
    }
    return out;
}

LabelSet Policy::init_labels() const {
    LabelSet out;
    for (const auto& r : init_rules) {
        if (r.target == EntityKind::File) out.add(r.label);
    }
    return out;
}

Policy Policy::parse(const std::string& text) {
    Policy p;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line_no = 0;

    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') parse_fail("bad section header at line " + std::to_string(line_no));
            section = line.substr(1, line.size() - 2);
            if (section != "init" && section != "transfer" && section != "phf" &&
                section != "judgment" && section != "sensitive") {
                parse_fail("unknown section '" + section + "'");
            }
            continue;
        }
        if (section.empty()) parse_fail("content before first section at line " + std::to_string(line_no));

        if (section == "init") {
            auto toks = split_ws(line);
            if (toks.size() != 3) parse_fail("init rule needs 'process|file <pattern> <label>' at line " + std::to_string(line_no));
            InitRule r;
            if (toks[0] == "process") r.target = EntityKind::Process;
            else if (toks[0] == "file") r.target = EntityKind::File;
            else parse_fail("init target must be process|file at line " + std::to_string(line_no));
            r.pattern_text = toks[1];
            r.pattern = compile_pattern(toks[1]);
            r.label = need_label(toks[2]);
            if (r.target == EntityKind::Process && !is_process_label(r.label)) {
                throw PolicyError(PolicyError::Kind::UnknownLabel,
                                  "policy: init rule on a process needs a process label (line " + std::to_string(line_no) + ")");
            }
            if (r.target == EntityKind::File && !is_file_label(r.label)) {
                throw PolicyError(PolicyError::Kind::UnknownLabel,
                                  "policy: init rule on a file needs a file label (line " + std::to_string(line_no) + ")");
            }
            p.init_rules.push_back(std::move(r));
        } else if (section == "transfer") {
            auto toks = split_ws(line);
            if (toks.size() != 4) parse_fail("transfer rule needs '<labels> <events> <label> <D|R>' at line " + std::to_string(line_no));
            TransferRule r;
            r.text = line;
            std::istringstream lbls(toks[0]);
            std::string one;
            while (std::getline(lbls, one, '|')) {
                Label l = need_label(one);
                if (!is_process_label(l)) {
                    throw PolicyError(PolicyError::Kind::UnknownLabel,
                                      "policy: transfer label 1 must be a process label: " + one);
                }
                r.process_labels.add(l);
            }
            if (r.process_labels.empty()) parse_fail("transfer rule with empty label 1 at line " + std::to_string(line_no));
            std::istringstream evs(toks[1]);
            while (std::getline(evs, one, ',')) {
                auto et = event_type_from_wire(one);
                if (!et) throw PolicyError(PolicyError::Kind::UnknownEventType, "policy: unknown event '" + one + "'");
                r.event_mask |= event_bit(*et);
            }
            Label l2 = need_label(toks[2]);
            if (!is_file_label(l2)) {
                throw PolicyError(PolicyError::Kind::UnknownLabel,
                                  "policy: transfer label 2 must be a file label: " + toks[2]);
            }
            r.file_label = l2;
            if (toks[3] == "D") r.direction = Direction::D;
            else if (toks[3] == "R") r.direction = Direction::R;
            else parse_fail("transfer direction must be D or R, got '" + toks[3] + "'");
            p.transfer_rules.push_back(std::move(r));
        } else if (section == "phf") {
            for (const auto& tok : split_ws(line)) {
                Label l = need_label(tok);
                if (!is_process_label(l)) {
                    throw PolicyError(PolicyError::Kind::UnknownLabel, "policy: PHF entries must be process labels: " + tok);
                }
                p.phf.add(l);
            }
        } else if (section == "judgment") {
            // name : severity : condition
            size_t c1 = line.find(':');
            size_t c2 = (c1 == std::string::npos) ? std::string::npos : line.find(':', c1 + 1);
            if (c1 == std::string::npos || c2 == std::string::npos) {
                parse_fail("judgment rule needs '<name> : <severity> : <condition>' at line " + std::to_string(line_no));
            }
            JudgmentRule r;
            r.alert_name = trim(line.substr(0, c1));
            std::string sev = trim(line.substr(c1 + 1, c2 - c1 - 1));
            if (sev == "Threat") r.severity = Severity::Threat;
            else if (sev == "APT") r.severity = Severity::APT;
            else parse_fail("judgment severity must be Threat or APT, got '" + sev + "'");
            r.condition = Condition::parse(trim(line.substr(c2 + 1)));
            if (r.alert_name.empty()) parse_fail("judgment rule with empty name at line " + std::to_string(line_no));
            for (Label l : r.condition.referenced().to_vector()) {
                if (!is_process_label(l)) {
                    throw PolicyError(PolicyError::Kind::UnknownLabel,
                                      "policy: judgment conditions evaluate process labels only, got " +
                                          std::string(label_name(l)));
                }
            }
            p.judgment_rules.push_back(std::move(r));
        } else if (section == "sensitive") {
            auto toks = split_ws(line);
            if (toks.size() != 2) parse_fail("sensitive entry needs 'file|command <pattern>' at line " + std::to_string(line_no));
            if (toks[0] == "file") {
                InitRule r;
                r.target = EntityKind::File;
                r.pattern_text = toks[1];
                r.pattern = compile_pattern(toks[1]);
                r.label = Label::PB2;  // applied to the executing subject
                p.sensitive_files.push_back(std::move(r));
            } else if (toks[0] == "command") {
                p.sensitive_commands.emplace_back(toks[1], compile_pattern(toks[1]));
            } else {
                parse_fail("sensitive entry must start with file|command at line " + std::to_string(line_no));
            }
        }
    }
    return p;
}

Policy Policy::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) parse_fail("cannot open policy file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

Policy Policy::built_in() { return parse(default_text()); }

// Default policy. Transfer rules cover the five stages (initial access,
// untrusted execution, lateral movement, suspicious behavior, data
// exfiltration); judgment rules raise the staged threat and APT alerts.
const char* Policy::default_text() {
    return R"(# provwatch default detection policy

[init]
# network-capable tool names; PS1 is also set on any process doing N0/N2
process  (.*/)?(scp|wget)        PS1
# shells: executing one hands out a shell
process  (.*/)?(sh|bash|dash)    PB5
file     .*/uploads?/.+          FU1
file     \(null\)                FU3
file     /etc/crontab            FH1
file     /etc/sudoers            FH2
file     /etc/(passwd|shadow)    FH3
file     .*\.bash_history        FH4

[transfer]
# label1  events  label2  direction
# initial access
PS1  E1         FU2  D
PS3  E0         FU2  R
PS3  E1         FU2  D
PS4  E0,E15     FU1  R
PS5  E0,E10,E15 FU3  R
# untrusted execution
PB1  E3         FU2  R
PB1  E10        FU2  R
PB1  E1         FU2  D
# lateral movement
PB4  E1         FU4  D
PB4  E0,E15     FU4  R
PB1  E1         FU5  D
PB1  E0         FU5  R
PS5  E1         FU6  D
PS5  E0         FU6  R
# suspicious behavior
PB6  E1         FH1  R
PB7  E1         FH2  R
PS6  E0         FH3  R
PS7  E0         FH4  R
# data exfiltration
PB6|PB7|PS6|PS7  E1  FH5  D
PB8  E0         FH5  R

[phf]
PS2 PS3 PS5 PB1 PB2 PB5

[judgment]
Download&Execution  : Threat : PB1
Webshell            : Threat : PS4&PB4
RAT                 : Threat : PB1&PB5
Living-off-the-land : Threat : PS5&PB5
Suspicious Behavior : Threat : PB6|PB7|PS6|PS7
Data Exfiltration   : Threat : PB8
APT                 : APT    : ((PS4&PB4)|(PB1&PB5)|(PS5&PB5))&PB8

[sensitive]
# executing these binaries marks the subject PB2
file     (.*/)?(nc|ncat|socat|nmap)
# command lines matching these mark the subject PB3
command  .*(chmod\s\+s|useradd|usermod|visudo|insmod).*
)";
}

}  // namespace provwatch
