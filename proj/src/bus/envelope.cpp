#include "lpar/bus/envelope.hpp"

namespace lpar::bus {

std::string_view to_string(TopicKind kind) noexcept {
    switch (kind) {
    case TopicKind::broadcast_request: return "broadcast_request";
    case TopicKind::broadcast_response: return "broadcast_response";
    case TopicKind::multicast: return "multicast";
    case TopicKind::private_request: return "private_request";
    case TopicKind::private_response: return "private_response";
    }
    return "broadcast_request";
}

std::string multicast_topic_name(std::string_view query_id) { return "mc/" + std::string(query_id); }

std::string private_request_topic_name(std::string_view agent_id) {
    return "agent/" + std::string(agent_id) + "/req";
}

std::string private_response_topic_name(std::string_view agent_id) {
    return "agent/" + std::string(agent_id) + "/resp";
}

std::string_view payload_kind(const Payload &payload) noexcept {
    switch (payload.index()) {
    case 0: return "query";
    case 1: return "response";
    default: return "control";
    }
}

}  // namespace lpar::bus
