#include <filesystem>
#include <fstream>
#include <thread>

#include "doctest.h"
#include "helpers.hpp"
#include "provwatch/ingest.hpp"

using namespace provwatch;
using namespace provwatch::testing;

namespace {

std::string temp_file(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out(path);
    for (const auto& l : lines) out << l << '\n';
}

}  // namespace

TEST_CASE("replay yields records in order with assigned seq") {
    std::string path = temp_file("pw_ingest_ok.jsonl");
    write_lines(path, {
                          serialize_event(fev(10, EventType::Read, "1:0", "/a")),
                          serialize_event(fev(20, EventType::Write, "1:0", "/a")),
                          serialize_event(fev(30, EventType::Read, "2:0", "/b")),
                      });
    EventReader reader({StreamSource::Mode::ReplayFile, path, {}});
    std::vector<EventRecord> got;
    while (auto e = reader.next()) got.push_back(*e);
    REQUIRE(got.size() == 3);
    CHECK(got[0].seq == 0);
    CHECK(got[1].seq == 1);
    CHECK(got[2].seq == 2);
    CHECK(reader.stats().events_emitted == 3);
    CHECK(reader.stats().bytes_read > 0);
    std::filesystem::remove(path);
}

TEST_CASE("a malformed line propagates with its position") {
    std::string path = temp_file("pw_ingest_bad.jsonl");
    write_lines(path, {serialize_event(fev(10, EventType::Read, "1:0", "/a")), "{broken"});
    EventReader reader({StreamSource::Mode::ReplayFile, path, {}});
    CHECK(reader.next().has_value());
    try {
        reader.next();
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
    }
    std::filesystem::remove(path);
}

TEST_CASE("stats start at zero and count monotonically") {
    std::string path = temp_file("pw_ingest_stats.jsonl");
    write_lines(path, {serialize_event(fev(10, EventType::Read, "1:0", "/a"))});
    EventReader reader({StreamSource::Mode::ReplayFile, path, {}});
    CHECK(reader.stats().events_emitted == 0);
    CHECK(reader.stats().bytes_read == 0);
    reader.next();
    CHECK(reader.stats().events_emitted == 1);
    std::filesystem::remove(path);
}

TEST_CASE("out-of-order records are dropped and counted, not reordered") {
    std::string path = temp_file("pw_ingest_ooo.jsonl");
    write_lines(path, {
                          serialize_event(fev(30, EventType::Read, "1:0", "/a")),
                          serialize_event(fev(10, EventType::Read, "1:0", "/a")),  // regresses
                          serialize_event(fev(30, EventType::Write, "1:0", "/a")),  // tie is fine
                          serialize_event(fev(40, EventType::Read, "1:0", "/a")),
                      });
    EventReader reader({StreamSource::Mode::ReplayFile, path, {}});
    std::vector<int64_t> ts;
    while (auto e = reader.next()) ts.push_back(e->ts);
    CHECK(ts == std::vector<int64_t>{30, 30, 40});
    CHECK(reader.stats().out_of_order_dropped == 1);
    std::filesystem::remove(path);
}

TEST_CASE("missing replay file raises SourceError") {
    CHECK_THROWS_AS(EventReader({StreamSource::Mode::ReplayFile, "/no/such/file", {}}),
                    SourceError);
}

TEST_CASE("bounded queue blocks the producer and tracks its high-water mark") {
    BoundedQueue<int> q(4);
    std::thread producer([&] {
        for (int i = 0; i < 64; ++i) q.push(i);
        q.close();
    });
    std::this_thread::sleep_for(std::chrono::milliseconds(20));  // let it fill

    std::vector<int> got;
    while (auto v = q.pop()) got.push_back(*v);
    producer.join();

    REQUIRE(got.size() == 64);  // backpressure, no drops
    for (int i = 0; i < 64; ++i) CHECK(got[i] == i);
    CHECK(q.high_water() <= 4);
    CHECK(q.high_water() >= 1);
}
