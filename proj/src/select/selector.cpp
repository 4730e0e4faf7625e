#include "lpar/select/selector.hpp"

#include <algorithm>
#include <set>

#include "lpar/common/error.hpp"

namespace lpar::select {

namespace {

void sort_gathered(std::vector<AgentResponse> &responses) {
    std::sort(responses.begin(), responses.end(), [](const AgentResponse &a, const AgentResponse &b) {
        if (a.latency_ms != b.latency_ms) return a.latency_ms < b.latency_ms;
        return a.agent_id < b.agent_id;
    });
}

}  // namespace

Selector::Selector(bus::MessageBus &bus, registry::Registry &registry, SelectorOptions options)
    : bus_(bus), registry_(registry), options_(options) {}

SelectionRequest Selector::stamped(const SelectionRequest &request) const {
    auto out = request;
    if (out.sent_at == 0) out.sent_at = bus_.clock().now();
    return out;
}

SelectionOutcome Selector::select(const SelectionRequest &request) {
    switch (request.strategy) {
    case Strategy::broadcast_only: return select_broadcast_only(request);
    case Strategy::search_and_multicast: return select_search_multicast(request);
    case Strategy::direct_to_bound: break;
    }
    throw Error(ErrorCode::invalid_argument, "direct_to_bound is not a selection strategy");
}

bus::Envelope Selector::make_query(const SelectionRequest &request, const bus::TopicId &topic,
                                   std::string reply_to) const {
    bus::Envelope env;
    env.correlation_id = request.query_id;
    env.session_id = request.session_id;
    env.topic = topic;
    env.sender_id = request.sender_id;
    env.reply_to = std::move(reply_to);
    env.payload = bus::Query{request.utterance, request.context, request.channel_id, request.session_status};
    env.sent_at = request.sent_at;
    return env;
}

Selector::Gather Selector::gather(bus::Mailbox &mailbox, const SelectionRequest &request, std::size_t expected) const {
    Gather out;
    std::set<std::string> responders;
    bool late = false;
    std::int64_t slowest = 0;
    const auto deadline = std::chrono::steady_clock::now() + options_.backstop;

    while (responders.size() < expected) {
        auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (remaining.count() <= 0) break;
        auto delivery = mailbox.pop_for(remaining);
        if (!delivery) break;
        const auto &env = delivery->envelope;
        const auto *response = std::get_if<bus::Response>(&env.payload);
        if (!response || env.correlation_id != request.query_id) continue;
        if (!responders.insert(response->response.agent_id).second) continue;

        const std::int64_t offset = env.sent_at - request.sent_at;
        if (offset > request.gather_window_ms) {
            late = true;
            continue;
        }
        slowest = std::max(slowest, offset);
        out.accepted.push_back(response->response);
    }

    const bool complete = responders.size() >= expected && !late;
    out.elapsed_ms = complete ? slowest : request.gather_window_ms;
    sort_gathered(out.accepted);
    return out;
}

void Selector::finish(SelectionOutcome &outcome, const SelectionRequest &request, Gather gathered) {
    outcome.gathered = std::move(gathered.accepted);
    outcome.elapsed_ms = gathered.elapsed_ms;

    std::vector<AgentResponse> eligible;
    RatingMap ratings;
    for (const auto &r : outcome.gathered) {
        try {
            registry_.record_latency(r.agent_id, r.latency_ms);
        } catch (const Error &) {
            // Deregistered while the round was running.
        }
        if (!request.channel_id.empty() && !registry_.eligible(r.agent_id, request.channel_id)) continue;
        ratings[r.effective_agent()] = registry_.rating_of(r.effective_agent());
        eligible.push_back(r);
    }
    outcome.winner = apply_policy(request.policy, eligible, ratings);
}

SelectionOutcome Selector::select_broadcast_only(const SelectionRequest &original) {
    const auto request = stamped(original);
    if (request.gather_window_ms <= 0) throw Error(ErrorCode::invalid_argument, "gather window must be positive");
    const auto [req_topic, resp_topic] = registry_.broadcast_topics(request.scope);

    const std::string gatherer = "gather/" + request.query_id + "/bcast";
    auto mailbox = bus_.mailbox(gatherer);
    auto sub = bus_.subscribe(resp_topic, gatherer);
    const auto expected = bus_.publish(req_topic, make_query(request, req_topic, resp_topic.name));

    SelectionOutcome outcome;
    outcome.strategy_executed = Strategy::broadcast_only;
    finish(outcome, request, gather(*mailbox, request, expected));
    return outcome;
}

SelectionOutcome Selector::select_search_multicast(const SelectionRequest &original) {
    const auto request = stamped(original);
    if (request.gather_window_ms <= 0) throw Error(ErrorCode::invalid_argument, "gather window must be positive");
    // Validates the scope before anything is sent.
    (void)registry_.broadcast_topics(request.scope);

    auto candidates = registry_.rank_scope(request.scope, request.embedding, request.k, request.similarity_floor);
    if (candidates.empty()) {
        auto outcome = select_broadcast_only(request);
        outcome.fallback_used = true;
        return outcome;
    }

    const auto mc = bus_.create_topic(bus::TopicKind::multicast, bus::multicast_topic_name(request.query_id));
    const std::string gatherer = "gather/" + request.query_id + "/mc";
    auto mailbox = bus_.mailbox(gatherer);
    auto sub = bus_.subscribe(mc, gatherer);

    for (const auto &c : candidates) {
        const auto topic = bus_.topic(bus::private_request_topic_name(c.agent_id));
        bus::Envelope control;
        control.correlation_id = request.query_id;
        control.session_id = request.session_id;
        control.topic = topic;
        control.sender_id = request.sender_id;
        control.payload = bus::Control{bus::ControlCommand::subscribe_multicast, mc.name};
        control.sent_at = request.sent_at;
        bus_.publish(topic, std::move(control));
    }
    bus_.wait_for_subscribers(mc.name, candidates.size() + 1, options_.backstop);

    // The gatherer also receives its own query; it is not a responder.
    const auto delivered = bus_.publish(mc, make_query(request, mc, mc.name));
    const std::size_t expected = delivered > 0 ? delivered - 1 : 0;

    SelectionOutcome outcome;
    outcome.strategy_executed = Strategy::search_and_multicast;
    outcome.candidates = std::move(candidates);
    auto gathered = gather(*mailbox, request, expected);
    sub.reset();
    bus_.teardown_topic(mc);
    finish(outcome, request, std::move(gathered));
    return outcome;
}

DirectResult Selector::ask_direct(const std::string &agent_id, const SelectionRequest &original) {
    const auto request = stamped(original);
    const auto req_topic = bus_.topic(bus::private_request_topic_name(agent_id));
    const auto resp_topic = bus_.topic(bus::private_response_topic_name(agent_id));

    const std::string gatherer = "gather/" + request.query_id + "/direct/" + agent_id;
    auto mailbox = bus_.mailbox(gatherer);
    auto sub = bus_.subscribe(resp_topic, gatherer);
    const auto delivered = bus_.publish(req_topic, make_query(request, req_topic, resp_topic.name));

    auto gathered = gather(*mailbox, request, delivered > 0 ? 1 : 0);
    DirectResult result;
    result.elapsed_ms = gathered.elapsed_ms;
    if (!gathered.accepted.empty()) {
        result.response = gathered.accepted.front();
        try {
            registry_.record_latency(agent_id, result.response->latency_ms);
        } catch (const Error &) {
        }
    }
    return result;
}

}  // namespace lpar::select
