#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "lpar/bus/envelope.hpp"
#include "lpar/bus/mailbox.hpp"
#include "lpar/common/clock.hpp"

namespace lpar::bus {

// One row of the delivery tap.
struct DeliveryRecord {
    std::string topic;
    TopicKind kind;
    std::string participant;
    std::string message_id;
    std::string correlation_id;
    std::string session_id;
    std::string payload_kind;  // "query", "response" or "control"
};

class MessageBus;

// Live while held. Destroying it detaches the participant from the topic.
class Subscription {
public:
    Subscription() = default;
    ~Subscription() { reset(); }
    Subscription(Subscription &&other) noexcept;
    Subscription &operator=(Subscription &&other) noexcept;
    Subscription(const Subscription &) = delete;
    Subscription &operator=(const Subscription &) = delete;

    void reset();
    [[nodiscard]] bool active() const noexcept { return !topic_.empty(); }
    [[nodiscard]] const std::string &topic() const noexcept { return topic_; }
    [[nodiscard]] const std::string &participant() const noexcept { return participant_; }

private:
    friend class MessageBus;
    struct State;
    Subscription(std::weak_ptr<State> bus, std::string topic, std::string participant, std::uint64_t serial)
        : bus_(std::move(bus)), topic_(std::move(topic)), participant_(std::move(participant)), serial_(serial) {}

    std::weak_ptr<State> bus_;
    std::string topic_;
    std::string participant_;
    std::uint64_t serial_ = 0;
};

// In-process publish/subscribe bus. Each participant owns one mailbox that
// collects deliveries from all of its subscriptions in publish order.
class MessageBus {
public:
    explicit MessageBus(LogicalClock &clock);
    ~MessageBus();

    MessageBus(const MessageBus &) = delete;
    MessageBus &operator=(const MessageBus &) = delete;

    TopicId create_topic(TopicKind kind, const std::string &name);
    // Creates the topic when absent. Throws DuplicateTopic if the name is
    // tombstoned or exists with a different kind.
    TopicId ensure_topic(TopicKind kind, const std::string &name);
    [[nodiscard]] bool has_topic(std::string_view name) const;
    [[nodiscard]] TopicId topic(std::string_view name) const;

    Subscription subscribe(const TopicId &topic, const std::string &participant_id);

    // Returns the number of subscribers the envelope was enqueued for. The
    // bus stamps a fresh message_id; sent_at defaults to the clock when 0.
    std::size_t publish(const TopicId &topic, Envelope envelope);

    void teardown_topic(const TopicId &topic);

    [[nodiscard]] std::shared_ptr<Mailbox> mailbox(const std::string &participant_id);
    [[nodiscard]] std::size_t subscriber_count(std::string_view topic) const;
    bool wait_for_subscribers(std::string_view topic, std::size_t count, std::chrono::milliseconds timeout) const;

    void set_recording(bool on);
    [[nodiscard]] std::vector<DeliveryRecord> delivery_log() const;
    void clear_delivery_log();

    [[nodiscard]] LogicalClock &clock() noexcept { return clock_; }

private:
    LogicalClock &clock_;
    std::shared_ptr<Subscription::State> state_;
};

}  // namespace lpar::bus
