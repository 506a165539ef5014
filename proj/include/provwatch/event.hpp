#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace provwatch {

enum class EntityKind : uint8_t { Process, File, Network };

const char* to_wire(EntityKind k);
std::optional<EntityKind> entity_kind_from_wire(std::string_view s);

// Identity of a graph vertex. Processes key on "pid:generation", files on the
// absolute path, network endpoints on "ip:port" or a DNS name. Two ids are
// equal iff kind and key both match.
struct EntityId {
    EntityKind kind = EntityKind::Process;
    std::string key;

    bool operator==(const EntityId&) const = default;
    bool operator<(const EntityId& o) const {
        if (kind != o.kind) return kind < o.kind;
        return key < o.key;
    }
};

struct EntityIdHash {
    size_t operator()(const EntityId& id) const {
        return std::hash<std::string>{}(id.key) * 3u + static_cast<size_t>(id.kind);
    }
};

inline EntityId process_id(std::string key) { return {EntityKind::Process, std::move(key)}; }
inline EntityId file_id(std::string path) { return {EntityKind::File, std::move(path)}; }
inline EntityId network_id(std::string endpoint) { return {EntityKind::Network, std::move(endpoint)}; }

// Wire codes: E0..E15 for host events, N0..N2 for network events.
enum class EventType : uint8_t {
    Read,          // E0
    Write,         // E1
    Fork,          // E2
    Execute,       // E3
    LoadLibrary,   // E4
    Delete,        // E5
    Rename,        // E6
    Create,        // E7
    FileProperty,  // E8
    Exit,          // E9
    LoadElf,       // E10
    Open,          // E11
    Close,         // E12
    ForkSharedFd,  // E13
    OpenCloexec,   // E14
    Mmap,          // E15
    Connect,       // N0
    Send,          // N1
    Recv,          // N2
};

inline constexpr size_t kEventTypeCount = 19;

const char* to_wire(EventType t);
std::optional<EventType> event_type_from_wire(std::string_view s);

inline constexpr bool is_network_event(EventType t) {
    return t == EventType::Connect || t == EventType::Send || t == EventType::Recv;
}

// Events that the process tree consumes structurally rather than semantically.
inline constexpr bool is_structural_event(EventType t) {
    return t == EventType::Fork || t == EventType::ForkSharedFd || t == EventType::Exit;
}

inline constexpr uint32_t event_bit(EventType t) { return 1u << static_cast<unsigned>(t); }

// One timestamped system event: the edge of the dependency graph.
// subject is always a process; seq is the arrival index and breaks ts ties.
struct EventRecord {
    int64_t ts = 0;  // nanoseconds
    EventType etype = EventType::Read;
    EntityId subject;
    EntityId object;
    std::string subject_name;  // executable image path
    std::string object_name;
    std::string args;  // optional detail (command line, rename target)
    uint64_t seq = 0;

    // Equality ignoring seq (the round-trip contract).
    bool same_record(const EventRecord& o) const {
        return ts == o.ts && etype == o.etype && subject == o.subject && object == o.object &&
               subject_name == o.subject_name && object_name == o.object_name && args == o.args;
    }
};

// Information-flow endpoints of an event. Reads, loads, mmaps and receives
// carry data into the subject; everything else flows subject -> object.
bool flows_into_subject(EventType t);
const EntityId& flow_source(const EventRecord& e);
const EntityId& flow_target(const EventRecord& e);

// Dependency relation between two events (first's object is second's subject
// and first happened strictly earlier).
inline bool depends_on(const EventRecord& first, const EventRecord& second) {
    return first.object == second.subject && first.ts < second.ts;
}

struct ParseError : std::runtime_error {
    enum class Kind { MalformedRecord, UnknownEventType, KindMismatch };
    Kind kind;
    uint64_t line;

    ParseError(Kind k, const std::string& msg, uint64_t line_no = 0)
        : std::runtime_error(msg), kind(k), line(line_no) {}
};

// Parses one canonical JSON line. seq is left for the caller to assign.
// Throws ParseError on bad syntax, unknown etype, or subject/object kind
// violations. Unknown extra fields are rejected.
EventRecord parse_event(std::string_view line, uint64_t line_no = 0);

// Canonical single-line serialization; parse_event(serialize_event(e)) equals
// e modulo seq.
std::string serialize_event(const EventRecord& e);

}  // namespace provwatch
