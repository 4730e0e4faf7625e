#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "lpar/agents/adapter.hpp"
#include "lpar/bus/message_bus.hpp"

namespace lpar::agents {

// What a node does with one query. The runtime fills in agent, query and
// session ids on the returned response.
class NodeHandler {
public:
    virtual ~NodeHandler() = default;
    virtual AgentResponse handle(const AgentCall &call) = 0;
};

// Handler that runs an adapter under the per-call budget.
class AdapterHandler : public NodeHandler {
public:
    AdapterHandler(std::shared_ptr<Adapter> adapter, AdapterOptions options = {})
        : adapter_(std::move(adapter)), options_(options) {}

    AgentResponse handle(const AgentCall &call) override { return invoke_adapter(*adapter_, call, options_); }

private:
    std::shared_ptr<Adapter> adapter_;
    AdapterOptions options_;
};

// Bus runtime for one registered node. Drains the node's mailbox on its own
// thread: queries go to the handler and the answer is published on the
// envelope's reply_to topic, stamped query.sent_at + latency; multicast
// controls (un)subscribe the node. The registry owns the broadcast and
// private subscriptions, this object only the multicast ones.
class AgentNode {
public:
    AgentNode(bus::MessageBus &bus, std::string agent_id, std::shared_ptr<NodeHandler> handler);
    ~AgentNode();

    AgentNode(const AgentNode &) = delete;
    AgentNode &operator=(const AgentNode &) = delete;

    void stop();
    [[nodiscard]] const std::string &agent_id() const noexcept { return agent_id_; }

private:
    void on_delivery(const bus::Delivery &delivery);

    bus::MessageBus &bus_;
    std::string agent_id_;
    std::shared_ptr<NodeHandler> handler_;
    std::mutex mutex_;
    std::map<std::string, bus::Subscription> multicast_;
    std::unique_ptr<bus::Actor> actor_;
};

}  // namespace lpar::agents
