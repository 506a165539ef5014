#pragma once

#include <string>

#include "provwatch/event.hpp"

namespace provwatch::testing {

inline EventRecord ev(int64_t ts, EventType t, const std::string& pid, const EntityId& obj,
                      uint64_t seq = 0, const std::string& subj_name = "/usr/bin/proc") {
    EventRecord e;
    e.ts = ts;
    e.etype = t;
    e.subject = process_id(pid);
    e.subject_name = subj_name;
    e.object = obj;
    e.object_name = obj.key;
    e.seq = seq;
    return e;
}

inline EventRecord fev(int64_t ts, EventType t, const std::string& pid, const std::string& path,
                       uint64_t seq = 0) {
    return ev(ts, t, pid, file_id(path), seq);
}

inline EventRecord nev(int64_t ts, EventType t, const std::string& pid, const std::string& endpoint,
                       uint64_t seq = 0) {
    return ev(ts, t, pid, network_id(endpoint), seq);
}

inline EventRecord pev(int64_t ts, EventType t, const std::string& pid, const std::string& child,
                       uint64_t seq = 0, const std::string& child_name = "/usr/bin/child") {
    EventRecord e = ev(ts, t, pid, process_id(child), seq);
    e.object_name = child_name;
    return e;
}

}  // namespace provwatch::testing
