#include "provwatch/event.hpp"

#include <array>

#include "json.hpp"

namespace provwatch {

namespace {

constexpr std::array<const char*, kEventTypeCount> kWireCodes = {
    "E0", "E1", "E2",  "E3",  "E4",  "E5",  "E6",  "E7",  "E8", "E9",
    "E10", "E11", "E12", "E13", "E14", "E15", "N0", "N1", "N2"};

}  // namespace

const char* to_wire(EntityKind k) {
    switch (k) {
        case EntityKind::Process: return "P";
        case EntityKind::File: return "F";
        case EntityKind::Network: return "N";
    }
    return "?";
}

std::optional<EntityKind> entity_kind_from_wire(std::string_view s) {
    if (s == "P") return EntityKind::Process;
    if (s == "F") return EntityKind::File;
    if (s == "N") return EntityKind::Network;
    return std::nullopt;
}

const char* to_wire(EventType t) { return kWireCodes[static_cast<size_t>(t)]; }

std::optional<EventType> event_type_from_wire(std::string_view s) {
    for (size_t i = 0; i < kWireCodes.size(); ++i) {
        if (s == kWireCodes[i]) return static_cast<EventType>(i);
    }
    return std::nullopt;
}

bool flows_into_subject(EventType t) {
    switch (t) {
        case EventType::Read:
        case EventType::Execute:
        case EventType::LoadLibrary:
        case EventType::LoadElf:
        case EventType::Open:
        case EventType::OpenCloexec:
        case EventType::Mmap:
        case EventType::Recv:
            return true;
        default:
            return false;
    }
}

const EntityId& flow_source(const EventRecord& e) {
    return flows_into_subject(e.etype) ? e.object : e.subject;
}

const EntityId& flow_target(const EventRecord& e) {
    return flows_into_subject(e.etype) ? e.subject : e.object;
}

namespace {

using json = nlohmann::json;

[[noreturn]] void malformed(const std::string& why, uint64_t line_no) {
    throw ParseError(ParseError::Kind::MalformedRecord, "malformed record: " + why, line_no);
}

// Enforces the closed field set of the canonical format.
void check_keys(const json& obj, std::initializer_list<const char*> required,
                std::initializer_list<const char*> optional, const char* where,
                uint64_t line_no) {
    for (const char* k : required) {
        if (!obj.contains(k)) malformed(std::string(where) + " missing field '" + k + "'", line_no);
    }
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : required) {
            if (it.key() == k) { known = true; break; }
        }
        if (!known) {
            for (const char* k : optional) {
                if (it.key() == k) { known = true; break; }
            }
        }
        if (!known) {
            malformed(std::string(where) + " has unknown field '" + it.key() + "'", line_no);
        }
    }
}

EntityId parse_entity(const json& obj, const char* where, bool with_name, std::string* name_out,
                      uint64_t line_no) {
    if (!obj.is_object()) malformed(std::string(where) + " is not an object", line_no);
    if (with_name) {
        check_keys(obj, {"k", "id", "name"}, {}, where, line_no);
    } else {
        check_keys(obj, {"k", "id"}, {}, where, line_no);
    }
    if (!obj["k"].is_string() || !obj["id"].is_string()) {
        malformed(std::string(where) + " fields must be strings", line_no);
    }
    auto kind = entity_kind_from_wire(obj["k"].get<std::string>());
    if (!kind) malformed(std::string(where) + " has unknown kind", line_no);
    std::string key = obj["id"].get<std::string>();
    if (key.empty()) malformed(std::string(where) + " id is empty", line_no);
    if (with_name) {
        if (!obj["name"].is_string()) malformed(std::string(where) + " name must be a string", line_no);
        *name_out = obj["name"].get<std::string>();
    }
    return {*kind, std::move(key)};
}

}  // namespace

EventRecord parse_event(std::string_view line, uint64_t line_no) {
    json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) malformed("not a JSON object", line_no);

    check_keys(doc, {"ts", "etype", "subj", "obj", "obj_name"}, {"args"}, "record", line_no);

    EventRecord e;
    if (!doc["ts"].is_number_integer()) malformed("ts must be an integer", line_no);
    e.ts = doc["ts"].get<int64_t>();

    if (!doc["etype"].is_string()) malformed("etype must be a string", line_no);
    auto et = event_type_from_wire(doc["etype"].get<std::string>());
    if (!et) {
        throw ParseError(ParseError::Kind::UnknownEventType,
                         "unknown event type '" + doc["etype"].get<std::string>() + "'", line_no);
    }
    e.etype = *et;

    e.subject = parse_entity(doc["subj"], "subj", true, &e.subject_name, line_no);
    e.object = parse_entity(doc["obj"], "obj", false, nullptr, line_no);

    if (!doc["obj_name"].is_string()) malformed("obj_name must be a string", line_no);
    e.object_name = doc["obj_name"].get<std::string>();
    if (doc.contains("args")) {
        if (!doc["args"].is_string()) malformed("args must be a string", line_no);
        e.args = doc["args"].get<std::string>();
    }

    if (e.subject.kind != EntityKind::Process) {
        throw ParseError(ParseError::Kind::KindMismatch, "subject must be a process", line_no);
    }
    if ((e.etype == EventType::Fork || e.etype == EventType::ForkSharedFd) &&
        e.object.kind != EntityKind::Process) {
        throw ParseError(ParseError::Kind::KindMismatch,
                         std::string(to_wire(e.etype)) + " requires a process object", line_no);
    }
    if (is_network_event(e.etype) && e.object.kind != EntityKind::Network) {
        throw ParseError(ParseError::Kind::KindMismatch,
                         std::string(to_wire(e.etype)) + " requires a network object", line_no);
    }
    if (!is_network_event(e.etype) && e.object.kind == EntityKind::Network) {
        throw ParseError(ParseError::Kind::KindMismatch,
                         "network objects are only valid for N0..N2", line_no);
    }
    return e;
}

std::string serialize_event(const EventRecord& e) {
    nlohmann::ordered_json doc;
    doc["ts"] = e.ts;
    doc["etype"] = to_wire(e.etype);
    doc["subj"] = {{"k", to_wire(e.subject.kind)}, {"id", e.subject.key}, {"name", e.subject_name}};
    doc["obj"] = {{"k", to_wire(e.object.kind)}, {"id", e.object.key}};
    doc["obj_name"] = e.object_name;
    if (!e.args.empty()) doc["args"] = e.args;
    return doc.dump();
}

}  // namespace provwatch
