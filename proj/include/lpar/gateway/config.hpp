#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lpar/agents/pod.hpp"
#include "lpar/common/json.hpp"
#include "lpar/orchestrate/orchestrator.hpp"
#include "lpar/registry/descriptors.hpp"
#include "lpar/stores/records.hpp"

namespace lpar::gateway {

// Agent kinds the config can instantiate.
enum class AgentKind { goal, faq, search, human_connect, scripted };

std::string_view to_string(AgentKind kind) noexcept;

struct AgentConfig {
    registry::AgentDescriptor descriptor;
    AgentKind kind = AgentKind::scripted;
    std::string description;
    std::vector<std::string> training_utterances;
    std::int64_t processing_ms = 0;
    // Kind-specific fixture data (intents, faqs, documents or script) as
    // written in the file; checked during validation.
    Json fixture = Json::object();
};

struct PodConfig {
    registry::AgentDescriptor descriptor;
    std::string description;
    std::vector<std::string> members;
    agents::PodSettings settings;
};

struct AppConfig {
    registry::AppDescriptor app;
    orchestrate::AppSettings settings;
    std::int64_t adapter_budget_ms = agents::default_adapter_budget_ms;
    std::vector<stores::UserProfile> users;
    std::vector<stores::RoutingRule> routing_rules;
    std::vector<AgentConfig> agents;
    std::vector<PodConfig> pods;

    // Parent pod of a node, if a pod lists it as a member.
    [[nodiscard]] std::optional<std::string> parent_of(std::string_view node_id) const;
};

// Reads and validates an app config. Relative lexicon and phrase-list paths
// resolve against the file's directory. Throws ParseError ("line N: ...")
// or ValidationError ("<field path>: ...").
AppConfig load_config(const std::filesystem::path &path);
AppConfig parse_config(std::string_view text, const std::filesystem::path &base_dir = ".");

// Parses one agent entry (also used for agents added at run time). Throws
// ValidationError with `path` as the field prefix.
AgentConfig parse_agent_config(const Json &j, const std::string &path = "agent");

// Checks kind-specific fixture data by building the implementation once.
void validate_agent_fixture(const AgentConfig &agent, const std::string &path);

// Builds the adapter-backed handler for a configured agent.
std::shared_ptr<agents::NodeHandler> make_agent_handler(const AgentConfig &agent, std::int64_t budget_ms);

Json descriptor_summary(const registry::AgentDescriptor &d);

}  // namespace lpar::gateway
