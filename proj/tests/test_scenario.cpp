#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "provwatch/event.hpp"
#include "provwatch/scenario.hpp"

using namespace provwatch;
namespace sc = provwatch::scenario;

TEST_CASE("same spec yields byte-identical corpus and manifest") {
    sc::Spec spec{sc::Kind::L1, 7, 4000};
    std::ostringstream a, b;
    sc::Manifest ma = sc::generate(spec, a);
    sc::Manifest mb = sc::generate(spec, b);
    CHECK(a.str() == b.str());
    CHECK(ma.to_json() == mb.to_json());

    std::ostringstream c;
    sc::Manifest mc = sc::generate({sc::Kind::L1, 8, 4000}, c);
    CHECK(a.str() != c.str());  // the seed matters
    CHECK(mc.event_count > 0);
}

TEST_CASE("benign corpus declares no expected alerts") {
    std::ostringstream out;
    sc::Manifest m = sc::generate({sc::Kind::Benign, 7, 3000}, out);
    CHECK(m.expected_alerts.empty());
    CHECK(m.apt_process.empty());
    CHECK(m.attack_event_count == 0);
}

TEST_CASE("corpus is valid, ordered, and matches the declared count") {
    std::ostringstream out;
    sc::Manifest m = sc::generate({sc::Kind::L2, 5, 5000}, out);

    std::istringstream in(out.str());
    std::string line;
    uint64_t n = 0;
    int64_t last_ts = 0;
    while (std::getline(in, line)) {
        EventRecord e = parse_event(line, n + 1);
        CHECK(e.ts >= last_ts);
        last_ts = e.ts;
        ++n;
    }
    CHECK(n == m.event_count);
    CHECK(m.first_ts <= m.last_ts);
}

TEST_CASE("attack events stay under five percent of the stream") {
    for (sc::Kind k : {sc::Kind::L1, sc::Kind::L2, sc::Kind::L3, sc::Kind::E1, sc::Kind::E2}) {
        std::ostringstream out;
        sc::Manifest m = sc::generate({k, 7, 6000}, out);
        CHECK(m.attack_event_count > 0);
        CHECK(static_cast<double>(m.attack_event_count) / m.event_count < 0.05);
        CHECK_FALSE(m.expected_alerts.empty());
        // every expected-alert process appears among the corpus subjects
        std::istringstream in(out.str());
        std::string line;
        std::set<std::string> subjects;
        while (std::getline(in, line)) subjects.insert(parse_event(line).subject.key);
        for (const auto& ea : m.expected_alerts) CHECK(subjects.count(ea.process_key) == 1);
    }
}

TEST_CASE("generation rate curve has distinct busy and idle phases") {
    std::ostringstream out;
    sc::Manifest m = sc::generate({sc::Kind::L1, 7, 40000}, out);  // spans a full cycle

    std::istringstream in(out.str());
    std::string line;
    std::map<int64_t, uint64_t> per_second;
    while (std::getline(in, line)) {
        per_second[parse_event(line).ts / 1'000'000'000]++;
    }
    REQUIRE(per_second.size() > 30);
    std::vector<uint64_t> rates;
    for (const auto& [sec, n] : per_second) rates.push_back(n);
    std::sort(rates.begin(), rates.end());
    uint64_t median = rates[rates.size() / 2];
    uint64_t peak = rates.back();
    CHECK(peak >= 3 * std::max<uint64_t>(1, median));  // busy bursts tower over idle stretches
    CHECK(m.busy_eps > m.idle_eps);
}

TEST_CASE("manifest round-trips through JSON") {
    std::ostringstream out;
    sc::Manifest m = sc::generate({sc::Kind::L3, 11, 4000}, out);
    sc::Manifest back = sc::Manifest::from_json_text(m.to_json());
    CHECK(back.scenario == m.scenario);
    CHECK(back.expected_alerts == m.expected_alerts);
    CHECK(back.apt_process == m.apt_process);
    CHECK(back.event_count == m.event_count);
    CHECK(back.attack_entities == m.attack_entities);
    CHECK(back.label_timeline.size() == m.label_timeline.size());
}
