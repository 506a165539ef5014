#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace provwatch::scenario {

enum class Kind { L1, L2, L3, E1, E2, Benign };

const char* kind_name(Kind k);
bool kind_from_name(const std::string& s, Kind* out);

struct Spec {
    Kind kind = Kind::Benign;
    uint64_t seed = 7;
    uint64_t events = 0;  // 0 = scenario default (1M for L-style, 2M for E-style)
};

struct ExpectedAlert {
    std::string alert;
    std::string process_key;
    bool operator==(const ExpectedAlert&) const = default;
};

struct TimelineEntry {
    std::string entity_key;
    std::string label;
    uint64_t event_index;  // seq of the event that sets the label
};

// Ground truth shipped alongside each corpus: what must fire, on whom, and
// the label chain that explains it.
struct Manifest {
    std::string scenario;
    uint64_t seed = 0;
    uint64_t event_count = 0;
    uint64_t attack_event_count = 0;
    std::vector<std::string> attack_entities;  // keys of the causal-chain entities
    std::vector<ExpectedAlert> expected_alerts;  // firing order
    std::string apt_process;  // empty when the narrative completes no APT
    std::vector<TimelineEntry> label_timeline;
    double busy_eps = 0;  // generation profile (event-time rates)
    double idle_eps = 0;
    int64_t first_ts = 0;
    int64_t last_ts = 0;

    std::string to_json() const;
    static Manifest from_json_text(const std::string& text);
    static Manifest load(const std::string& path);
};

// Writes a deterministic canonical-format corpus; same (kind, seed, events)
// yields byte-identical output.
Manifest generate(const Spec& spec, std::ostream& corpus);
Manifest generate_files(const Spec& spec, const std::string& corpus_path,
                        const std::string& manifest_path);

}  // namespace provwatch::scenario
