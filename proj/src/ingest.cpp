#include "provwatch/ingest.hpp"

#include <iostream>

namespace provwatch {

EventReader::EventReader(const StreamSource& src) : started_(std::chrono::steady_clock::now()) {
    if (src.mode == StreamSource::Mode::ReplayFile) {
        file_.open(src.path);
        if (!file_) throw SourceError("cannot open replay file '" + src.path + "'");
        in_ = &file_;
    } else {
        in_ = &std::cin;
    }
}

std::optional<EventRecord> EventReader::next() {
    std::string line;
    while (std::getline(*in_, line)) {
        ++line_no_;
        bytes_ += line.size() + 1;
        if (line.empty()) continue;
        EventRecord e = parse_event(line, line_no_);
        if (e.ts < last_ts_) {
            ++dropped_;
            continue;
        }
        last_ts_ = e.ts;
        e.seq = next_seq_++;
        return e;
    }
    return std::nullopt;
}

ReaderStats EventReader::stats() const {
    ReaderStats s;
    s.events_emitted = next_seq_;
    s.bytes_read = bytes_;
    s.out_of_order_dropped = dropped_;
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
    s.events_per_second = secs > 0 ? static_cast<double>(next_seq_) / secs : 0;
    return s;
}

}  // namespace provwatch
