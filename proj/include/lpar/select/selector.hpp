#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lpar/bus/message_bus.hpp"
#include "lpar/embed/embedding.hpp"
#include "lpar/registry/registry.hpp"
#include "lpar/select/policy.hpp"

namespace lpar::select {

struct SelectionRequest {
    std::string query_id;
    std::string session_id;
    std::string utterance;
    embed::Embedding embedding = embed::Embedding::zero();
    registry::Scope scope;
    Strategy strategy = Strategy::search_and_multicast;
    std::int64_t gather_window_ms = 2000;
    std::size_t k = 3;
    double similarity_floor = 0.1;
    PolicyId policy = PolicyId::highest_confidence;

    // Forwarded to the agents inside the Query payload.
    ContextSnapshot context;
    std::string channel_id;
    SessionStatus session_status = SessionStatus::active;

    // Logical time the query is sent; responses are stamped relative to it.
    std::int64_t sent_at = 0;
    std::string sender_id = "orchestrator";
};

struct SelectionOutcome {
    std::optional<AgentResponse> winner;
    // Every response accepted inside the window, ordered by (latency, agent id).
    std::vector<AgentResponse> gathered;
    Strategy strategy_executed = Strategy::broadcast_only;
    bool fallback_used = false;
    std::vector<registry::RankedAgent> candidates;  // empty for broadcast rounds
    std::int64_t elapsed_ms = 0;                    // logical time the round took
};

struct DirectResult {
    std::optional<AgentResponse> response;  // absent on silence or a late reply
    std::int64_t elapsed_ms = 0;
};

struct SelectorOptions {
    // Wall-clock cap on waiting for agents that never answer. The logical
    // gather window decides which answers count; this only bounds the wait.
    std::chrono::milliseconds backstop{10000};
};

// Runs scatter-gather selection rounds over the bus. Safe to use from many
// threads at once; each round gathers on its own short-lived participant and
// matches responses strictly by correlation id.
class Selector {
public:
    Selector(bus::MessageBus &bus, registry::Registry &registry, SelectorOptions options = {});

    // Dispatches on request.strategy (direct_to_bound is rejected).
    SelectionOutcome select(const SelectionRequest &request);
    SelectionOutcome select_broadcast_only(const SelectionRequest &request);
    SelectionOutcome select_search_multicast(const SelectionRequest &request);

    // Sends the query on one agent's private request topic and waits for its
    // answer on the private response topic.
    DirectResult ask_direct(const std::string &agent_id, const SelectionRequest &request);

private:
    struct Gather {
        std::vector<AgentResponse> accepted;
        std::int64_t elapsed_ms = 0;
    };

    // Fills sent_at from the clock when the caller left it 0.
    SelectionRequest stamped(const SelectionRequest &request) const;
    bus::Envelope make_query(const SelectionRequest &request, const bus::TopicId &topic, std::string reply_to) const;
    Gather gather(bus::Mailbox &mailbox, const SelectionRequest &request, std::size_t expected) const;
    void finish(SelectionOutcome &outcome, const SelectionRequest &request, Gather gathered);

    bus::MessageBus &bus_;
    registry::Registry &registry_;
    SelectorOptions options_;
};

}  // namespace lpar::select
