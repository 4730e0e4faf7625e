#pragma once

#include <functional>
#include <map>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lpar/bus/message_bus.hpp"
#include "lpar/registry/descriptors.hpp"

namespace lpar::registry {

std::string app_broadcast_request_topic(std::string_view app_id);
std::string app_broadcast_response_topic(std::string_view app_id);
std::string pod_broadcast_request_topic(std::string_view pod_id);
std::string pod_broadcast_response_topic(std::string_view pod_id);

// EWMA weight given to a new latency sample.
inline constexpr double latency_ewma_alpha = 0.2;

// App Store, App Router, Serving Store and Pod member store in one catalog.
// Registration wires the bus: broadcast topics per app and pod, private
// topics per node, and the node's subscription to its parent's broadcast
// request topic.
class Registry {
public:
    using DeregisterListener = std::function<void(const std::string &agent_id)>;

    explicit Registry(bus::MessageBus &bus);
    ~Registry();

    Registry(const Registry &) = delete;
    Registry &operator=(const Registry &) = delete;

    void register_app(AppDescriptor descriptor);
    [[nodiscard]] AppDescriptor route_app(std::string_view app_id) const;
    [[nodiscard]] std::vector<AppDescriptor> apps() const;
    [[nodiscard]] bool has_app(std::string_view app_id) const;

    void register_agent(const std::string &app_id, AgentDescriptor descriptor,
                        std::vector<std::string> training_utterances,
                        std::optional<std::string> parent_pod = std::nullopt);
    // Removing a pod removes its whole subtree. Listeners fire once per
    // removed node, after the registry lock is released.
    void deregister_agent(const std::string &agent_id);
    // Moves an existing node under `pod_id`. Throws CyclicPod when the move
    // would make a pod its own descendant.
    void add_pod_member(const std::string &pod_id, const std::string &member_id);

    [[nodiscard]] std::vector<RankedAgent> rank_by_centroid(const std::string &app_id, const embed::Embedding &query,
                                                            std::size_t k, double floor) const;
    [[nodiscard]] std::vector<RankedAgent> rank_scope(const Scope &scope, const embed::Embedding &query,
                                                      std::size_t k, double floor) const;

    void update_status(const std::string &agent_id, AgentStatus status);
    void update_rating(const std::string &agent_id, Rating rating);
    void record_latency(const std::string &agent_id, double latency_ms);

    [[nodiscard]] bool has_agent(std::string_view agent_id) const;
    [[nodiscard]] AgentDescriptor descriptor(std::string_view agent_id) const;
    // Every node registered under the app, pods and members included, by id.
    [[nodiscard]] std::vector<AgentDescriptor> agents(std::string_view app_id) const;
    [[nodiscard]] std::vector<std::string> training_utterances(std::string_view agent_id) const;
    [[nodiscard]] PodMembership pod_membership(std::string_view pod_id) const;
    // Direct members of the scope, in registration order.
    [[nodiscard]] std::vector<std::string> scope_members(const Scope &scope, bool online_only = true) const;
    [[nodiscard]] std::pair<bus::TopicId, bus::TopicId> broadcast_topics(const Scope &scope) const;
    [[nodiscard]] Rating rating_of(std::string_view agent_id) const;
    // Serving-matrix check for a session channel. Pods always pass.
    [[nodiscard]] bool eligible(std::string_view agent_id, std::string_view channel_id) const;

    void on_deregister(DeregisterListener listener);

private:
    struct AgentEntry {
        AgentDescriptor descriptor;
        std::vector<std::string> utterances;
        std::vector<std::string> members;  // pods only
        bus::Subscription broadcast_sub;
        bus::Subscription private_sub;
    };

    std::vector<std::string> scope_members_locked(const Scope &scope, bool online_only) const;
    void subscribe_to_parent_locked(AgentEntry &entry);
    void refresh_pod_centroids_locked(std::optional<std::string> pod_id);
    void collect_utterances_locked(const std::string &agent_id, std::vector<std::string> &out) const;
    void remove_subtree_locked(const std::string &agent_id, std::vector<std::string> &removed);
    const AgentEntry &entry_locked(std::string_view agent_id) const;
    AgentEntry &entry_locked(std::string_view agent_id);

    bus::MessageBus &bus_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, AppDescriptor, std::less<>> apps_;
    std::map<std::string, AgentEntry, std::less<>> agents_;
    std::map<std::string, std::vector<std::string>, std::less<>> top_level_;  // app -> node ids
    std::vector<DeregisterListener> listeners_;
};

}  // namespace lpar::registry
