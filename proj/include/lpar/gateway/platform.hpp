#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "lpar/agents/node.hpp"
#include "lpar/agents/pod.hpp"
#include "lpar/bus/message_bus.hpp"
#include "lpar/common/clock.hpp"
#include "lpar/gateway/config.hpp"
#include "lpar/orchestrate/orchestrator.hpp"
#include "lpar/registry/registry.hpp"
#include "lpar/select/selector.hpp"
#include "lpar/stores/stores.hpp"

namespace lpar::gateway {

struct PlatformOptions {
    std::int64_t clock_start_ms = 0;
    select::SelectorOptions selector;
};

struct Conversation {
    std::string session_id;
    std::string user_id;
    std::string greeting;
    bool resumed = false;  // an existing live session of the user was reused
};

// Everything one process hosts: bus, registry, stores, selector, one
// orchestrator per app and a runtime per registered node.
class Platform {
public:
    explicit Platform(PlatformOptions options = {});
    ~Platform();

    Platform(const Platform &) = delete;
    Platform &operator=(const Platform &) = delete;

    // Registers the app and its whole node tree. Everything is checked before
    // the first registration, so a failure leaves the platform unchanged.
    void load_app(const AppConfig &config);

    // Run-time registration of a configured agent, optionally inside a pod.
    void add_agent(const std::string &app_id, const AgentConfig &agent,
                   const std::optional<std::string> &parent_pod = std::nullopt);
    // Registration with a caller-supplied behavior (tests, embedders).
    void add_node(const std::string &app_id, registry::AgentDescriptor descriptor,
                  std::vector<std::string> training_utterances, std::shared_ptr<agents::NodeHandler> handler,
                  const std::optional<std::string> &parent_pod = std::nullopt);
    void add_pod(const std::string &app_id, registry::AgentDescriptor descriptor, agents::PodSettings settings,
                 const std::optional<std::string> &parent_pod = std::nullopt);
    // Removes the node (and a pod's subtree), unbinding affected sessions.
    void remove_agent(const std::string &agent_id);

    // Resolves the channel identity to a user and continues that user's live
    // session in the app, or opens a new one on the given channel.
    Conversation start_conversation(const std::string &app_id, const std::string &channel_id,
                                    const std::string &channel_local_user);
    orchestrate::TurnResult send(const std::string &session_id, const std::string &text);
    Rating record_feedback(const stores::FeedbackRecord &record);
    [[nodiscard]] Json agents_json(const std::string &app_id) const;

    void snapshot(const std::filesystem::path &dir);
    // Loads store snapshots written by snapshot(); missing files are skipped.
    void restore(const std::filesystem::path &dir);

    orchestrate::CustomerServiceAgent &orchestrator(const std::string &app_id);
    std::optional<std::shared_ptr<agents::PodCoordinator>> pod(const std::string &pod_id) const;

    LogicalClock &clock() noexcept { return clock_; }
    bus::MessageBus &bus() noexcept { return bus_; }
    registry::Registry &registry() noexcept { return registry_; }
    stores::Stores &stores() noexcept { return stores_; }
    select::Selector &selector() noexcept { return selector_; }

private:
    void start_node(const std::string &agent_id, std::shared_ptr<agents::NodeHandler> handler);
    void on_deregistered(const std::string &agent_id);

    LogicalClock clock_;
    bus::MessageBus bus_;
    registry::Registry registry_;
    stores::Stores stores_;
    select::Selector selector_;

    mutable std::mutex mutex_;
    std::map<std::string, std::unique_ptr<orchestrate::CustomerServiceAgent>> apps_;
    std::map<std::string, std::int64_t> budgets_;  // app -> adapter budget
    std::map<std::string, std::shared_ptr<agents::PodCoordinator>> pods_;
    // Declared last so node threads stop before anything they use goes away.
    std::map<std::string, std::unique_ptr<agents::AgentNode>> nodes_;
};

}  // namespace lpar::gateway
