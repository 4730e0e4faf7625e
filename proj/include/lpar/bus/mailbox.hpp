#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>

#include "lpar/bus/envelope.hpp"

namespace lpar::bus {

// Unbounded FIFO of deliveries for one participant. Pushing never blocks.
class Mailbox {
public:
    void push(Delivery delivery);

    // Blocks until an item arrives or the mailbox is closed and drained.
    std::optional<Delivery> pop();
    std::optional<Delivery> pop_for(std::chrono::milliseconds timeout);
    std::optional<Delivery> try_pop();

    void close();
    [[nodiscard]] bool closed() const;
    [[nodiscard]] std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::condition_variable ready_;
    std::deque<Delivery> queue_;
    bool closed_ = false;
};

// Drains one mailbox on a dedicated thread, one delivery at a time.
class Actor {
public:
    using Handler = std::function<void(const Delivery &)>;

    Actor(std::shared_ptr<Mailbox> mailbox, Handler handler);
    ~Actor();

    Actor(const Actor &) = delete;
    Actor &operator=(const Actor &) = delete;

    // Closes the mailbox and joins; pending deliveries are still handled.
    void stop();

private:
    std::shared_ptr<Mailbox> mailbox_;
    Handler handler_;
    std::thread thread_;
};

}  // namespace lpar::bus
