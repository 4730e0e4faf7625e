#include "lpar/agents/pod.hpp"

#include "lpar/embed/embedding.hpp"

namespace lpar::agents {

PodCoordinator::PodCoordinator(select::Selector &selector, registry::Registry &registry, std::string app_id,
                               std::string pod_id, PodSettings settings)
    : selector_(selector),
      registry_(registry),
      app_id_(std::move(app_id)),
      pod_id_(std::move(pod_id)),
      settings_(settings) {}

std::optional<std::string> PodCoordinator::inner_binding(const std::string &session_id) const {
    std::lock_guard lock(mutex_);
    auto it = bindings_.find(session_id);
    if (it == bindings_.end()) return std::nullopt;
    return it->second;
}

void PodCoordinator::clear_bindings_for(const std::string &member_id) {
    std::lock_guard lock(mutex_);
    std::erase_if(bindings_, [&](const auto &kv) { return kv.second == member_id; });
}

AgentResponse PodCoordinator::handle(const AgentCall &call) {
    select::SelectionRequest request;
    // A turn can reach the pod twice (direct, then in the parent's round);
    // the suffix keeps the two sub-rounds' topic names apart.
    request.query_id = call.query_id + "@" + pod_id_ + (call.mode == DeliveryMode::direct ? "/direct" : "");
    request.session_id = call.session_id;
    request.utterance = call.utterance;
    request.embedding = embed::embed_text(call.utterance);
    request.scope = registry::Scope::pod(app_id_, pod_id_);
    request.strategy = settings_.strategy;
    request.gather_window_ms = settings_.gather_window_ms;
    request.k = settings_.k;
    request.similarity_floor = settings_.similarity_floor;
    request.policy = settings_.policy;
    request.context = call.context;
    request.channel_id = call.channel_id;
    request.session_status = call.session_status;
    request.sent_at = call.sent_at;
    request.sender_id = pod_id_;

    auto relay = [&](const AgentResponse &winner, double extra_latency) {
        AgentResponse out = winner;
        out.served_by = winner.effective_agent();
        out.latency_ms = winner.latency_ms + extra_latency;
        return out;
    };

    double spent = 0.0;
    if (call.mode == DeliveryMode::direct) {
        if (auto member = inner_binding(call.session_id); member && registry_.has_agent(*member)) {
            auto direct = selector_.ask_direct(*member, request);
            if (direct.response && direct.response->disposition != Disposition::out_of_scope) {
                return relay(*direct.response, 0.0);
            }
            spent = static_cast<double>(direct.elapsed_ms);
            request.sent_at += direct.elapsed_ms;
        }
    }

    {
        std::lock_guard lock(mutex_);
        bindings_.erase(call.session_id);
    }

    auto outcome = selector_.select(request);
    if (!outcome.winner) {
        AgentResponse declined;
        declined.latency_ms = spent + static_cast<double>(outcome.elapsed_ms);
        return declined;
    }
    {
        std::lock_guard lock(mutex_);
        bindings_[call.session_id] = outcome.winner->agent_id;
    }
    return relay(*outcome.winner, spent);
}

}  // namespace lpar::agents
