#include "lpar/gateway/platform.hpp"

#include <functional>

#include "lpar/common/error.hpp"
#include "lpar/common/text.hpp"

namespace lpar::gateway {

Platform::Platform(PlatformOptions options)
    : clock_(options.clock_start_ms),
      bus_(clock_),
      registry_(bus_),
      stores_(registry_, clock_),
      selector_(bus_, registry_, options.selector) {
    registry_.on_deregister([this](const std::string &agent_id) { on_deregistered(agent_id); });
}

Platform::~Platform() {
    std::map<std::string, std::unique_ptr<agents::AgentNode>> nodes;
    {
        std::lock_guard lock(mutex_);
        nodes.swap(nodes_);
    }
    for (auto &[id, node] : nodes) node->stop();
}

void Platform::start_node(const std::string &agent_id, std::shared_ptr<agents::NodeHandler> handler) {
    auto node = std::make_unique<agents::AgentNode>(bus_, agent_id, std::move(handler));
    std::lock_guard lock(mutex_);
    nodes_[agent_id] = std::move(node);
}

void Platform::on_deregistered(const std::string &agent_id) {
    stores_.sessions.unbind_agent(agent_id);
    std::unique_ptr<agents::AgentNode> node;
    {
        std::lock_guard lock(mutex_);
        for (auto &[id, pod] : pods_) pod->clear_bindings_for(agent_id);
        pods_.erase(agent_id);
        if (auto it = nodes_.find(agent_id); it != nodes_.end()) {
            node = std::move(it->second);
            nodes_.erase(it);
        }
    }
    if (node) node->stop();
}

void Platform::load_app(const AppConfig &config) {
    const auto &app_id = config.app.app_id;
    if (registry_.has_app(app_id)) throw Error(ErrorCode::duplicate_app, "app already loaded: " + app_id);
    for (const auto &a : config.agents) {
        if (registry_.has_agent(a.descriptor.agent_id)) {
            throw Error(ErrorCode::duplicate_agent, "agent id already registered: " + a.descriptor.agent_id);
        }
    }
    for (const auto &p : config.pods) {
        if (registry_.has_agent(p.descriptor.agent_id)) {
            throw Error(ErrorCode::duplicate_agent, "agent id already registered: " + p.descriptor.agent_id);
        }
    }
    // Build every handler up front so fixture errors surface before any
    // registration happens.
    std::map<std::string, std::shared_ptr<agents::NodeHandler>> handlers;
    for (const auto &a : config.agents) handlers[a.descriptor.agent_id] = make_agent_handler(a, config.adapter_budget_ms);

    registry_.register_app(config.app);
    {
        std::lock_guard lock(mutex_);
        budgets_[app_id] = config.adapter_budget_ms;
    }

    // Parents register before their members.
    std::map<std::string, const AgentConfig *> agent_by_id;
    std::map<std::string, const PodConfig *> pod_by_id;
    for (const auto &a : config.agents) agent_by_id[a.descriptor.agent_id] = &a;
    for (const auto &p : config.pods) pod_by_id[p.descriptor.agent_id] = &p;

    std::function<void(const std::string &, const std::optional<std::string> &)> place =
        [&](const std::string &id, const std::optional<std::string> &parent) {
            if (auto a = agent_by_id.find(id); a != agent_by_id.end()) {
                registry_.register_agent(app_id, a->second->descriptor, a->second->training_utterances, parent);
                start_node(id, handlers.at(id));
                return;
            }
            const auto *pod = pod_by_id.at(id);
            add_pod(app_id, pod->descriptor, pod->settings, parent);
            for (const auto &member : pod->members) place(member, id);
        };
    for (const auto &a : config.agents) {
        if (!config.parent_of(a.descriptor.agent_id)) place(a.descriptor.agent_id, std::nullopt);
    }
    for (const auto &p : config.pods) {
        if (!config.parent_of(p.descriptor.agent_id)) place(p.descriptor.agent_id, std::nullopt);
    }

    for (const auto &user : config.users) stores_.users.upsert(user);
    for (const auto &rule : config.routing_rules) stores_.routing.set_rule(rule);

    auto csa = std::make_unique<orchestrate::CustomerServiceAgent>(registry_, stores_, selector_, clock_, config.settings);
    std::lock_guard lock(mutex_);
    apps_[app_id] = std::move(csa);
}

void Platform::add_agent(const std::string &app_id, const AgentConfig &agent,
                         const std::optional<std::string> &parent_pod) {
    std::int64_t budget = agents::default_adapter_budget_ms;
    {
        std::lock_guard lock(mutex_);
        if (auto it = budgets_.find(app_id); it != budgets_.end()) budget = it->second;
    }
    add_node(app_id, agent.descriptor, agent.training_utterances, make_agent_handler(agent, budget), parent_pod);
}

void Platform::add_node(const std::string &app_id, registry::AgentDescriptor descriptor,
                        std::vector<std::string> training_utterances, std::shared_ptr<agents::NodeHandler> handler,
                        const std::optional<std::string> &parent_pod) {
    const auto id = descriptor.agent_id;
    registry_.register_agent(app_id, std::move(descriptor), std::move(training_utterances), parent_pod);
    start_node(id, std::move(handler));
}

void Platform::add_pod(const std::string &app_id, registry::AgentDescriptor descriptor, agents::PodSettings settings,
                       const std::optional<std::string> &parent_pod) {
    const auto id = descriptor.agent_id;
    descriptor.node_type = registry::NodeType::pod;
    descriptor.agent_class = registry::AgentClass::not_applicable;
    registry_.register_agent(app_id, std::move(descriptor), {}, parent_pod);
    auto coordinator = std::make_shared<agents::PodCoordinator>(selector_, registry_, app_id, id, settings);
    {
        std::lock_guard lock(mutex_);
        pods_[id] = coordinator;
    }
    start_node(id, coordinator);
}

void Platform::remove_agent(const std::string &agent_id) { registry_.deregister_agent(agent_id); }

Conversation Platform::start_conversation(const std::string &app_id, const std::string &channel_id,
                                          const std::string &channel_local_user) {
    auto &csa = orchestrator(app_id);
    if (trim(channel_local_user).empty()) throw Error(ErrorCode::invalid_argument, "user must be nonempty");
    const auto app = registry_.route_app(app_id);
    if (!app.channel_ids.count(channel_id)) {
        throw Error(ErrorCode::unsupported_channel, "app " + app_id + " does not serve channel " + channel_id);
    }
    const auto user = stores_.users.resolve_user(channel_id, channel_local_user);

    Conversation c;
    c.user_id = user.user_id;
    c.greeting = csa.greeting_for(user.user_id);
    if (auto live = stores_.sessions.live_session_for(app_id, user.user_id)) {
        c.session_id = *live;
        c.resumed = true;
    } else {
        c.session_id = stores_.sessions.open_session(app_id, user.user_id, channel_id).session_id;
    }
    return c;
}

orchestrate::TurnResult Platform::send(const std::string &session_id, const std::string &text) {
    const auto session = stores_.sessions.get(session_id);
    if (trim(text).empty()) throw Error(ErrorCode::invalid_argument, "message text must be nonempty");
    return orchestrator(session.app_id).handle_turn(session_id, text);
}

Rating Platform::record_feedback(const stores::FeedbackRecord &record) {
    if (!record.session_id.empty()) (void)stores_.sessions.get(record.session_id);
    return stores_.feedback.record_feedback(record);
}

Json Platform::agents_json(const std::string &app_id) const {
    Json out = Json::array();
    for (const auto &d : registry_.agents(app_id)) out.push_back(descriptor_summary(d));
    return out;
}

void Platform::snapshot(const std::filesystem::path &dir) { stores_.snapshot(dir); }

void Platform::restore(const std::filesystem::path &dir) {
    stores_.load(dir);
    std::lock_guard lock(mutex_);
    for (auto &[id, csa] : apps_) csa->sync_query_ids();
}

orchestrate::CustomerServiceAgent &Platform::orchestrator(const std::string &app_id) {
    std::lock_guard lock(mutex_);
    auto it = apps_.find(app_id);
    if (it == apps_.end()) throw Error(ErrorCode::unknown_app, "unknown app: " + app_id);
    return *it->second;
}

std::optional<std::shared_ptr<agents::PodCoordinator>> Platform::pod(const std::string &pod_id) const {
    std::lock_guard lock(mutex_);
    auto it = pods_.find(pod_id);
    if (it == pods_.end()) return std::nullopt;
    return it->second;
}

}  // namespace lpar::gateway
