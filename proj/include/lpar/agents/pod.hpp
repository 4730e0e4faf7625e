#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "lpar/agents/node.hpp"
#include "lpar/registry/registry.hpp"
#include "lpar/select/selector.hpp"

namespace lpar::agents {

struct PodSettings {
    Strategy strategy = Strategy::broadcast_only;
    std::size_t k = 3;
    double similarity_floor = 0.1;
    PolicyId policy = PolicyId::highest_confidence;
    std::int64_t gather_window_ms = 2000;
};

// Makes a pod answer like a single agent. A direct delivery goes to the
// member bound for the session, if any; when that member declines (or on any
// selection delivery) a round runs over the pod's members and the winner's
// answer is relayed upward with served_by naming the member that produced
// it. Confidence and latency are relayed as-is so the parent's policy sees
// the same numbers it would see with the members flattened into it.
class PodCoordinator : public NodeHandler {
public:
    PodCoordinator(select::Selector &selector, registry::Registry &registry, std::string app_id, std::string pod_id,
                   PodSettings settings);

    AgentResponse handle(const AgentCall &call) override;

    [[nodiscard]] std::optional<std::string> inner_binding(const std::string &session_id) const;
    void clear_bindings_for(const std::string &member_id);

private:
    select::Selector &selector_;
    registry::Registry &registry_;
    std::string app_id_;
    std::string pod_id_;
    PodSettings settings_;
    mutable std::mutex mutex_;
    std::map<std::string, std::string> bindings_;  // session -> member
};

}  // namespace lpar::agents
