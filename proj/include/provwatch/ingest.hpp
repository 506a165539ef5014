#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <limits>
#include <mutex>
#include <optional>

#include "provwatch/event.hpp"

namespace provwatch {

struct SourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StreamSource {
    enum class Mode { ReplayFile, LivePipe };
    Mode mode = Mode::ReplayFile;
    std::string path;                        // replay file path
    std::optional<double> rate_limit;        // events/second throttle
};

struct ReaderStats {
    uint64_t events_emitted = 0;
    uint64_t bytes_read = 0;
    double events_per_second = 0;  // wall clock
    uint64_t out_of_order_dropped = 0;
};

// Pulls canonical-format lines from a replay file or standard input, assigns
// seq, and enforces the (ts, seq) ordering contract. Records with a timestamp
// lower than the last emitted one are dropped and counted, never reordered.
class EventReader {
public:
    explicit EventReader(const StreamSource& src);

    // Next record in order, or nullopt at end of stream. Parse failures
    // propagate as ParseError carrying the 1-based line number.
    std::optional<EventRecord> next();

    ReaderStats stats() const;

private:
    std::ifstream file_;
    std::istream* in_ = nullptr;
    uint64_t next_seq_ = 0;
    uint64_t line_no_ = 0;
    uint64_t bytes_ = 0;
    uint64_t dropped_ = 0;
    int64_t last_ts_ = std::numeric_limits<int64_t>::min();
    std::chrono::steady_clock::time_point started_;
};

// Single-producer single-consumer bounded queue with blocking push (the
// backpressure contract: nothing is dropped) and a high-water mark.
template <typename T>
class BoundedQueue {
public:
    explicit BoundedQueue(size_t capacity) : capacity_(capacity) {}

    void push(T item) {
        std::unique_lock lk(mu_);
        not_full_.wait(lk, [&] { return items_.size() < capacity_ || closed_; });
        if (closed_) return;
        items_.push_back(std::move(item));
        high_water_ = std::max(high_water_, items_.size());
        not_empty_.notify_one();
    }

    std::optional<T> pop() {
        std::unique_lock lk(mu_);
        not_empty_.wait(lk, [&] { return !items_.empty() || closed_; });
        if (items_.empty()) return std::nullopt;
        T item = std::move(items_.front());
        items_.pop_front();
        not_full_.notify_one();
        return item;
    }

    void close() {
        std::lock_guard lk(mu_);
        closed_ = true;
        not_empty_.notify_all();
        not_full_.notify_all();
    }

    size_t high_water() const {
        std::lock_guard lk(mu_);
        return high_water_;
    }
    size_t capacity() const { return capacity_; }

private:
    size_t capacity_;
    mutable std::mutex mu_;
    std::condition_variable not_empty_;
    std::condition_variable not_full_;
    std::deque<T> items_;
    size_t high_water_ = 0;
    bool closed_ = false;
};

}  // namespace provwatch
