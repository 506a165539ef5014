#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "provwatch/pipeline.hpp"
#include "provwatch/scenario.hpp"

using namespace provwatch;
using namespace provwatch::testing;
namespace sc = provwatch::scenario;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

std::vector<std::pair<std::string, std::string>> alert_pairs(const std::vector<Alert>& alerts) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& a : alerts) out.emplace_back(a.name, a.process.key);
    return out;
}

}  // namespace

TEST_CASE("a minimal webshell chain raises the staged alerts in real time") {
    Engine engine(EngineConfig{}, Policy::built_in());
    uint64_t seq = 0;
    auto feed = [&](EventRecord e) {
        e.seq = seq++;
        engine.process(e);
    };

    feed(nev(100, EventType::Recv, "1:0", "203.0.113.7:443"));
    feed(fev(200, EventType::Write, "1:0", "/var/www/html/uploads/shell.php"));
    feed(ev(300, EventType::Mmap, "2:0", file_id("/var/www/html/uploads/shell.php")));
    feed(fev(400, EventType::Execute, "2:0", "/bin/id"));       // Webshell on 2:0
    feed(fev(500, EventType::Write, "2:0", "/tmp/cleanup.sh"));
    feed(fev(600, EventType::Read, "3:0", "/tmp/cleanup.sh"));
    feed(fev(700, EventType::Write, "3:0", "/etc/crontab"));    // Suspicious Behavior on 3:0
    feed(fev(800, EventType::Read, "3:0", "/etc/passwd"));
    feed(fev(900, EventType::Write, "3:0", "/home/a/secret"));
    feed(fev(1000, EventType::Read, "2:0", "/home/a/secret"));  // Exfiltration + APT on 2:0
    engine.finish();

    auto pairs = alert_pairs(engine.alerts());
    std::vector<std::pair<std::string, std::string>> expected = {
        {"Webshell", "2:0"},
        {"Suspicious Behavior", "3:0"},
        {"Data Exfiltration", "2:0"},
        {"APT", "2:0"},
    };
    CHECK(pairs == expected);

    // alerts fire on the completing event
    CHECK(engine.alerts()[0].trigger_ts == 400);
    CHECK(engine.alerts()[3].trigger_ts == 1000);
    CHECK(engine.stats().apt_alerts == 1);

    // the APT chain was traced automatically and reaches the entry points
    REQUIRE(engine.chains().size() == 1);
    const AttackChain& chain = engine.chains()[0];
    CHECK(chain.contains(file_id("/var/www/html/uploads/shell.php")));
    CHECK(chain.contains(network_id("203.0.113.7:443")));
    CHECK(chain.contains(process_id("3:0")));
}

TEST_CASE("skipping drops redundant events without losing alerts") {
    EngineConfig with;
    EngineConfig without;
    without.disable_compaction();

    for (EngineConfig* cfg : {&with, &without}) {
        Engine engine(*cfg, Policy::built_in());
        uint64_t seq = 0;
        auto feed = [&](EventRecord e) {
            e.seq = seq++;
            engine.process(e);
        };
        feed(nev(1, EventType::Recv, "1:0", "x:1"));
        for (int i = 0; i < 10; ++i) feed(nev(2 + i, EventType::Recv, "1:0", "x:1"));
        feed(fev(20, EventType::Write, "1:0", "/tmp/dl"));
        for (int i = 0; i < 5; ++i) feed(fev(21 + i, EventType::Write, "1:0", "/tmp/dl"));
        feed(fev(30, EventType::Execute, "2:0", "/tmp/dl"));
        engine.finish();
        CHECK(engine.alerts().size() == 1);
        CHECK(engine.alerts()[0].name == "Download&Execution");
        if (cfg == &with) {
            CHECK(engine.stats().events_skipped >= 10);
        } else {
            CHECK(engine.stats().events_skipped == 0);
        }
    }
}

TEST_CASE("pipeline runs threaded and synchronously with identical results") {
    std::string corpus = temp_path("pw_pipe_l1.jsonl");
    sc::generate_files({sc::Kind::L1, 7, 8000}, corpus, "");

    Engine sync_engine(EngineConfig{}, Policy::built_in());
    RunResult sync_result = run_sync({StreamSource::Mode::ReplayFile, corpus, {}}, sync_engine);

    Engine thr_engine(EngineConfig{}, Policy::built_in());
    RunResult thr_result =
        run_threaded({StreamSource::Mode::ReplayFile, corpus, {}}, thr_engine, 1024);

    CHECK(alert_pairs(sync_result.alerts) == alert_pairs(thr_result.alerts));
    CHECK(sync_result.stats.events_total == thr_result.stats.events_total);
    CHECK(sync_result.stats.events_skipped == thr_result.stats.events_skipped);
    CHECK(sync_result.stats.processes_pruned == thr_result.stats.processes_pruned);
    CHECK(thr_result.stats.queue_high_water <= 1024);
    CHECK(thr_result.exit_code == 2);  // the corpus carries an APT
    std::filesystem::remove(corpus);
}

TEST_CASE("detection equivalence on a small generated corpus") {
    std::string corpus = temp_path("pw_equiv_l2.jsonl");
    sc::generate_files({sc::Kind::L2, 9, 12000}, corpus, "");

    EngineConfig on;
    EngineConfig off;
    off.disable_compaction();
    Engine e_on(on, Policy::built_in());
    Engine e_off(off, Policy::built_in());
    auto r_on = run_sync({StreamSource::Mode::ReplayFile, corpus, {}}, e_on);
    auto r_off = run_sync({StreamSource::Mode::ReplayFile, corpus, {}}, e_off);

    auto a = alert_pairs(r_on.alerts);
    auto b = alert_pairs(r_off.alerts);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
    CHECK(r_on.stats.events_skipped > 0);
    std::filesystem::remove(corpus);
}

TEST_CASE("manifest alerts and label timeline replay exactly") {
    std::string corpus = temp_path("pw_manifest_l1.jsonl");
    std::string manifest_path = temp_path("pw_manifest_l1.json");
    sc::generate_files({sc::Kind::L1, 7, 12000}, corpus, manifest_path);
    sc::Manifest manifest = sc::Manifest::load(manifest_path);

    Engine engine(EngineConfig{}, Policy::built_in());
    RunResult result = run_sync({StreamSource::Mode::ReplayFile, corpus, {}}, engine);

    std::vector<std::pair<std::string, std::string>> expected;
    for (const auto& ea : manifest.expected_alerts) expected.emplace_back(ea.alert, ea.process_key);
    CHECK(alert_pairs(result.alerts) == expected);
    REQUIRE_FALSE(manifest.apt_process.empty());
    CHECK(result.alerts.back().name == "APT");
    CHECK(result.alerts.back().process.key == manifest.apt_process);

    // the recorded label timeline matches the evidence trail
    for (const auto& t : manifest.label_timeline) {
        auto label = label_from_name(t.label);
        REQUIRE(label.has_value());
        LabelSet have;
        std::vector<LabelEvidence> evidence;
        if (is_process_label(*label)) {
            const ProcessNode* p = engine.store().process(process_id(t.entity_key));
            REQUIRE(p != nullptr);
            have = p->labels;
            evidence = p->evidence;
        } else {
            FileNode* f = engine.store().file(file_id(t.entity_key));
            REQUIRE(f != nullptr);
            have = f->labels;
            evidence = f->evidence;
        }
        CHECK(have.has(*label));
        bool cause_matches = false;
        for (const auto& ev : evidence) {
            if (ev.label == *label && ev.cause_seq == t.event_index) cause_matches = true;
        }
        CHECK(cause_matches);
    }
    std::filesystem::remove(corpus);
    std::filesystem::remove(manifest_path);
}

TEST_CASE("a malformed replay line aborts the threaded run after the drain") {
    std::string corpus = temp_path("pw_pipe_bad.jsonl");
    {
        std::ofstream out(corpus);
        out << serialize_event(fev(1, EventType::Read, "1:0", "/a")) << '\n';
        out << "{nope\n";
    }
    Engine engine(EngineConfig{}, Policy::built_in());
    CHECK_THROWS_AS(run_threaded({StreamSource::Mode::ReplayFile, corpus, {}}, engine, 16),
                    ParseError);
    CHECK(engine.stats().events_total == 1);  // the valid prefix was processed
    std::filesystem::remove(corpus);
}

TEST_CASE("stats ratios are consistent with their counters") {
    std::string corpus = temp_path("pw_stats_benign.jsonl");
    sc::generate_files({sc::Kind::Benign, 7, 6000}, corpus, "");
    Engine engine(EngineConfig{}, Policy::built_in());
    RunResult r = run_sync({StreamSource::Mode::ReplayFile, corpus, {}}, engine);
    const RunStats& s = r.stats;
    CHECK(s.skip_ratio == doctest::Approx(double(s.events_skipped) / s.events_total));
    CHECK(s.process_prune_ratio == doctest::Approx(double(s.processes_pruned) / s.processes_total));
    CHECK(s.skip_ratio >= 0);
    CHECK(s.skip_ratio <= 1);
    CHECK(s.apt_alerts == 0);
    CHECK(r.exit_code == 0);
    std::string json = s.to_json();
    CHECK(json.find("\"schema\": 1") != std::string::npos);
    std::filesystem::remove(corpus);
}

TEST_CASE("tree integrity holds after a full scenario run") {
    std::string corpus = temp_path("pw_tree_l3.jsonl");
    sc::generate_files({sc::Kind::L3, 7, 10000}, corpus, "");
    Engine engine(EngineConfig{}, Policy::built_in());
    run_sync({StreamSource::Mode::ReplayFile, corpus, {}}, engine);
    CHECK(engine.store().check_tree().empty());
    std::filesystem::remove(corpus);
}
