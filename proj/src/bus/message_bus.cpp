#include "lpar/bus/message_bus.hpp"

#include <algorithm>
#include <condition_variable>
#include <map>
#include <mutex>
#include <set>

#include "lpar/common/error.hpp"

namespace lpar::bus {

struct Subscription::State {
    struct Subscriber {
        std::string participant;
        std::shared_ptr<Mailbox> mailbox;
        std::uint64_t serial = 0;
        std::size_t refs = 0;
    };
    struct Topic {
        TopicId id;
        std::vector<Subscriber> subscribers;
    };

    mutable std::mutex mutex;
    mutable std::condition_variable changed;
    std::map<std::string, Topic, std::less<>> topics;
    std::set<std::string, std::less<>> tombstones;
    std::map<std::string, std::weak_ptr<Mailbox>, std::less<>> mailboxes;
    std::uint64_t next_serial = 0;
    std::uint64_t next_message = 0;
    bool recording = false;
    std::vector<DeliveryRecord> log;

    std::shared_ptr<Mailbox> mailbox_locked(const std::string &participant) {
        auto &slot = mailboxes[participant];
        auto box = slot.lock();
        if (!box) {
            box = std::make_shared<Mailbox>();
            slot = box;
        }
        return box;
    }

    void unsubscribe(const std::string &topic, const std::string &participant, std::uint64_t serial) {
        {
            std::lock_guard lock(mutex);
            auto it = topics.find(topic);
            if (it == topics.end()) return;
            auto &subs = it->second.subscribers;
            auto sub = std::find_if(subs.begin(), subs.end(), [&](const Subscriber &s) {
                return s.participant == participant && s.serial == serial;
            });
            if (sub == subs.end()) return;
            if (--sub->refs == 0) subs.erase(sub);
        }
        changed.notify_all();
    }
};

Subscription::Subscription(Subscription &&other) noexcept
    : bus_(std::move(other.bus_)),
      topic_(std::move(other.topic_)),
      participant_(std::move(other.participant_)),
      serial_(other.serial_) {
    other.topic_.clear();
}

Subscription &Subscription::operator=(Subscription &&other) noexcept {
    if (this != &other) {
        reset();
        bus_ = std::move(other.bus_);
        topic_ = std::move(other.topic_);
        participant_ = std::move(other.participant_);
        serial_ = other.serial_;
        other.topic_.clear();
    }
    return *this;
}

void Subscription::reset() {
    if (topic_.empty()) return;
    if (auto state = bus_.lock()) state->unsubscribe(topic_, participant_, serial_);
    topic_.clear();
    bus_.reset();
}

MessageBus::MessageBus(LogicalClock &clock) : clock_(clock), state_(std::make_shared<Subscription::State>()) {}

MessageBus::~MessageBus() {
    std::lock_guard lock(state_->mutex);
    for (auto &[name, weak] : state_->mailboxes) {
        if (auto box = weak.lock()) box->close();
    }
}

TopicId MessageBus::create_topic(TopicKind kind, const std::string &name) {
    if (name.empty()) throw Error(ErrorCode::invalid_argument, "topic name must be nonempty");
    std::lock_guard lock(state_->mutex);
    if (state_->topics.count(name) || state_->tombstones.count(name)) {
        throw Error(ErrorCode::duplicate_topic, "topic already exists: " + name);
    }
    TopicId id{kind, name};
    state_->topics.emplace(name, Subscription::State::Topic{id, {}});
    return id;
}

TopicId MessageBus::ensure_topic(TopicKind kind, const std::string &name) {
    {
        std::lock_guard lock(state_->mutex);
        auto it = state_->topics.find(name);
        if (it != state_->topics.end()) {
            if (it->second.id.kind != kind) throw Error(ErrorCode::duplicate_topic, "topic exists with another kind: " + name);
            return it->second.id;
        }
    }
    return create_topic(kind, name);
}

bool MessageBus::has_topic(std::string_view name) const {
    std::lock_guard lock(state_->mutex);
    return state_->topics.find(name) != state_->topics.end();
}

TopicId MessageBus::topic(std::string_view name) const {
    std::lock_guard lock(state_->mutex);
    auto it = state_->topics.find(name);
    if (it == state_->topics.end()) throw Error(ErrorCode::unknown_topic, "unknown topic: " + std::string(name));
    return it->second.id;
}

Subscription MessageBus::subscribe(const TopicId &topic, const std::string &participant_id) {
    std::uint64_t serial = 0;
    {
        std::lock_guard lock(state_->mutex);
        auto it = state_->topics.find(topic.name);
        if (it == state_->topics.end()) throw Error(ErrorCode::unknown_topic, "unknown topic: " + topic.name);
        auto &subs = it->second.subscribers;
        auto existing = std::find_if(subs.begin(), subs.end(),
                                     [&](const auto &s) { return s.participant == participant_id; });
        if (existing != subs.end()) {
            ++existing->refs;
            serial = existing->serial;
        } else {
            serial = ++state_->next_serial;
            subs.push_back({participant_id, state_->mailbox_locked(participant_id), serial, 1});
        }
    }
    state_->changed.notify_all();
    return Subscription(state_, topic.name, participant_id, serial);
}

std::size_t MessageBus::publish(const TopicId &topic, Envelope envelope) {
    if (envelope.topic != topic) {
        throw Error(ErrorCode::topic_mismatch, "envelope addressed to " + envelope.topic.name + ", published on " + topic.name);
    }
    std::lock_guard lock(state_->mutex);
    auto it = state_->topics.find(topic.name);
    if (it == state_->topics.end()) throw Error(ErrorCode::unknown_topic, "unknown topic: " + topic.name);
    envelope.message_id = "m-" + std::to_string(++state_->next_message);
    if (envelope.sent_at == 0) envelope.sent_at = clock_.now();
    const auto &subs = it->second.subscribers;
    for (const auto &sub : subs) {
        if (state_->recording) {
            state_->log.push_back({topic.name, topic.kind, sub.participant, envelope.message_id,
                                   envelope.correlation_id, envelope.session_id,
                                   std::string(payload_kind(envelope.payload))});
        }
        sub.mailbox->push(Delivery{it->second.id, envelope});
    }
    return subs.size();
}

void MessageBus::teardown_topic(const TopicId &topic) {
    {
        std::lock_guard lock(state_->mutex);
        auto it = state_->topics.find(topic.name);
        if (it == state_->topics.end()) throw Error(ErrorCode::unknown_topic, "unknown topic: " + topic.name);
        if (it->second.id.kind != TopicKind::multicast) {
            throw Error(ErrorCode::not_multicast, "only multicast topics can be torn down: " + topic.name);
        }
        state_->topics.erase(it);
        state_->tombstones.insert(topic.name);
    }
    state_->changed.notify_all();
}

std::shared_ptr<Mailbox> MessageBus::mailbox(const std::string &participant_id) {
    std::lock_guard lock(state_->mutex);
    // Drop entries whose mailbox died so short-lived gatherers do not accumulate.
    std::erase_if(state_->mailboxes, [](const auto &kv) { return kv.second.expired(); });
    return state_->mailbox_locked(participant_id);
}

std::size_t MessageBus::subscriber_count(std::string_view topic) const {
    std::lock_guard lock(state_->mutex);
    auto it = state_->topics.find(topic);
    return it == state_->topics.end() ? 0 : it->second.subscribers.size();
}

bool MessageBus::wait_for_subscribers(std::string_view topic, std::size_t count,
                                      std::chrono::milliseconds timeout) const {
    std::unique_lock lock(state_->mutex);
    return state_->changed.wait_for(lock, timeout, [&] {
        auto it = state_->topics.find(topic);
        return it != state_->topics.end() && it->second.subscribers.size() >= count;
    });
}

void MessageBus::set_recording(bool on) {
    std::lock_guard lock(state_->mutex);
    state_->recording = on;
}

std::vector<DeliveryRecord> MessageBus::delivery_log() const {
    std::lock_guard lock(state_->mutex);
    return state_->log;
}

void MessageBus::clear_delivery_log() {
    std::lock_guard lock(state_->mutex);
    state_->log.clear();
}

}  // namespace lpar::bus
