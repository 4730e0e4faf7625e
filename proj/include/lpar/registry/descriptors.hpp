#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lpar/common/types.hpp"
#include "lpar/embed/embedding.hpp"

namespace lpar::registry {

enum class DataClassification { public_, internal, sensitive };
enum class NodeType { agent, pod };
enum class ConnectionProtocol { in_process, external_adapter };
enum class AgentStatus { online, offline };
enum class AgentScope { internal, external };
enum class AgentClass { conversational, faq, question_answer, semantic_search, knowledge_graph, not_applicable };

std::string_view to_string(DataClassification v) noexcept;
std::string_view to_string(NodeType v) noexcept;
std::string_view to_string(ConnectionProtocol v) noexcept;
std::string_view to_string(AgentStatus v) noexcept;
std::string_view to_string(AgentScope v) noexcept;
std::string_view to_string(AgentClass v) noexcept;

// App Store row.
struct AppDescriptor {
    std::string name;
    std::string app_id;
    std::set<std::string> channel_ids;
    // Channel id -> agent classes allowed to serve sessions on that channel.
    std::map<std::string, std::set<AgentClass>> serving_matrix;
    int resilience_rating = 3;  // 1..5
    DataClassification data_classification = DataClassification::internal;

    friend bool operator==(const AppDescriptor &, const AppDescriptor &) = default;
};

// Serving Store row for one agent or pod.
struct AgentDescriptor {
    std::string agent_id;
    std::string name;
    std::string version;
    NodeType node_type = NodeType::agent;
    embed::Centroid centroid;
    ConnectionProtocol connection_protocol = ConnectionProtocol::in_process;
    std::string private_request_topic;
    std::string private_response_topic;
    AgentStatus status = AgentStatus::online;
    AgentScope scope = AgentScope::internal;
    AgentClass agent_class = AgentClass::conversational;
    Rating rating = Rating::Beginner;
    std::set<std::string> channels_supported;
    double avg_response_time_ms = 0.0;

    // Filled in by the registry.
    std::string app_id;
    std::optional<std::string> parent_pod;

    friend bool operator==(const AgentDescriptor &, const AgentDescriptor &) = default;
};

struct PodMembership {
    std::string pod_id;
    std::vector<std::string> member_ids;
};

// Where a selection round looks for candidates: an app's top level, or the
// members of one pod.
struct Scope {
    std::string app_id;
    std::optional<std::string> pod_id;

    static Scope app(std::string id) { return {std::move(id), std::nullopt}; }
    static Scope pod(std::string app_id, std::string pod_id) { return {std::move(app_id), std::move(pod_id)}; }
};

struct RankedAgent {
    std::string agent_id;
    double similarity = 0.0;

    friend bool operator==(const RankedAgent &, const RankedAgent &) = default;
};

}  // namespace lpar::registry
