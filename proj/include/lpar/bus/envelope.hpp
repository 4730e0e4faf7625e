#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include "lpar/common/types.hpp"

namespace lpar::bus {

enum class TopicKind { broadcast_request, broadcast_response, multicast, private_request, private_response };

std::string_view to_string(TopicKind kind) noexcept;

struct TopicId {
    TopicKind kind = TopicKind::broadcast_request;
    std::string name;

    friend bool operator==(const TopicId &, const TopicId &) = default;
};

// Topic naming conventions.
std::string multicast_topic_name(std::string_view query_id);
std::string private_request_topic_name(std::string_view agent_id);
std::string private_response_topic_name(std::string_view agent_id);

struct Query {
    std::string utterance;
    ContextSnapshot context;
    std::string channel_id;
    SessionStatus session_status = SessionStatus::active;
};

struct Response {
    AgentResponse response;
};

enum class ControlCommand { subscribe_multicast, unsubscribe_multicast, shutdown };

struct Control {
    ControlCommand command = ControlCommand::shutdown;
    std::string argument;
};

using Payload = std::variant<Query, Response, Control>;

std::string_view payload_kind(const Payload &payload) noexcept;

struct Envelope {
    std::string message_id;  // assigned by the bus on publish
    std::string correlation_id;
    std::string session_id;
    TopicId topic;
    std::string sender_id;
    // Topic name the recipient should answer on (queries only).
    std::string reply_to;
    Payload payload;
    std::int64_t sent_at = 0;  // logical ms
};

// One envelope as seen by one subscriber.
struct Delivery {
    TopicId topic;
    Envelope envelope;
};

}  // namespace lpar::bus
