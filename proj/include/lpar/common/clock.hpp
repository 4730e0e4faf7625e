#pragma once

#include <atomic>
#include <cstdint>
#include <string>

namespace lpar {

// Milliseconds on a logical timeline. Nothing advances it except explicit
// calls, so runs driven by the same inputs see the same timestamps.
class LogicalClock {
public:
    explicit LogicalClock(std::int64_t start_ms = 0) : now_(start_ms) {}

    [[nodiscard]] std::int64_t now() const noexcept { return now_.load(); }
    std::int64_t advance(std::int64_t delta_ms) noexcept { return now_ += delta_ms; }
    void set(std::int64_t ms) noexcept { now_ = ms; }

private:
    std::atomic<std::int64_t> now_;
};

// Sequential ids of the form "<prefix>-<n>".
class IdGenerator {
public:
    explicit IdGenerator(std::string prefix) : prefix_(std::move(prefix)) {}

    std::string next() { return prefix_ + "-" + std::to_string(++counter_); }
    // Continue numbering after ids restored from a snapshot.
    void bump_past(std::uint64_t value) {
        auto cur = counter_.load();
        while (cur < value && !counter_.compare_exchange_weak(cur, value)) {}
    }

private:
    std::string prefix_;
    std::atomic<std::uint64_t> counter_{0};
};

}  // namespace lpar
