#include "lpar/agents/node.hpp"

#include <cmath>
#include <exception>

#include "lpar/common/error.hpp"

namespace lpar::agents {

AgentNode::AgentNode(bus::MessageBus &bus, std::string agent_id, std::shared_ptr<NodeHandler> handler)
    : bus_(bus), agent_id_(std::move(agent_id)), handler_(std::move(handler)) {
    actor_ = std::make_unique<bus::Actor>(bus_.mailbox(agent_id_),
                                          [this](const bus::Delivery &d) { on_delivery(d); });
}

AgentNode::~AgentNode() { stop(); }

void AgentNode::stop() {
    if (actor_) actor_->stop();
    std::lock_guard lock(mutex_);
    multicast_.clear();
}

void AgentNode::on_delivery(const bus::Delivery &delivery) {
    const auto &env = delivery.envelope;

    if (const auto *control = std::get_if<bus::Control>(&env.payload)) {
        std::lock_guard lock(mutex_);
        switch (control->command) {
        case bus::ControlCommand::subscribe_multicast:
            // Topics of finished rounds are gone from the bus; forget them.
            std::erase_if(multicast_, [&](const auto &kv) { return !bus_.has_topic(kv.first); });
            try {
                multicast_[control->argument] = bus_.subscribe(bus_.topic(control->argument), agent_id_);
            } catch (const Error &) {
            }
            break;
        case bus::ControlCommand::unsubscribe_multicast:
            multicast_.erase(control->argument);
            break;
        case bus::ControlCommand::shutdown:
            break;
        }
        return;
    }

    const auto *query = std::get_if<bus::Query>(&env.payload);
    if (!query || env.reply_to.empty()) return;

    AgentCall call;
    call.agent_id = agent_id_;
    call.query_id = env.correlation_id;
    call.session_id = env.session_id;
    call.utterance = query->utterance;
    call.context = query->context;
    call.channel_id = query->channel_id;
    call.session_status = query->session_status;
    call.mode = delivery.topic.kind == bus::TopicKind::private_request ? DeliveryMode::direct : DeliveryMode::selection;
    call.sent_at = env.sent_at;

    AgentResponse response;
    try {
        response = handler_->handle(call);
    } catch (const std::exception &) {
        response = AgentResponse{};
    }
    response.agent_id = agent_id_;
    response.query_id = env.correlation_id;
    response.session_id = env.session_id;

    try {
        bus::Envelope reply;
        reply.correlation_id = env.correlation_id;
        reply.session_id = env.session_id;
        reply.topic = bus_.topic(env.reply_to);
        reply.sender_id = agent_id_;
        reply.sent_at = env.sent_at + std::llround(response.latency_ms);
        reply.payload = bus::Response{std::move(response)};
        const auto topic = reply.topic;
        bus_.publish(topic, std::move(reply));
    } catch (const Error &) {
        // The round already ended and its topic is gone.
    }
}

}  // namespace lpar::agents
