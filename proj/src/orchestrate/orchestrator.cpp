#include "lpar/orchestrate/orchestrator.hpp"

#include <algorithm>

#include "lpar/common/error.hpp"
#include "lpar/common/text.hpp"
#include "lpar/embed/embedding.hpp"

namespace lpar::orchestrate {

std::string_view to_string(HandoverReason reason) noexcept {
    switch (reason) {
    case HandoverReason::explicit_request: return "explicit_request";
    case HandoverReason::low_sentiment: return "low_sentiment";
    case HandoverReason::repeated_oos: return "repeated_oos";
    case HandoverReason::agent_request: return "agent_request";
    }
    return "explicit_request";
}

std::optional<HandoverReason> handover_reason(const stores::SessionRecord &session, std::string_view text,
                                              const HandoverSettings &settings) {
    for (const auto &phrase : settings.phrases) {
        if (contains_phrase(text, phrase)) return HandoverReason::explicit_request;
    }
    if (session.last_sentiment < settings.sentiment_threshold) return HandoverReason::low_sentiment;
    if (session.consecutive_oos >= settings.oos_threshold) return HandoverReason::repeated_oos;
    return std::nullopt;
}

void to_json(Json &j, const TraceEntry &t) {
    j = Json{{"agent_id", t.agent_id},
             {"disposition", t.disposition},
             {"confidence", t.confidence},
             {"latency_ms", t.latency_ms}};
    if (t.served_by) j["served_by"] = *t.served_by;
}

void to_json(Json &j, const TurnResult &t) {
    j = Json{{"query_id", t.query_id},
             {"reply", t.reply_text},
             {"agent_id", t.agent_id},
             {"agent_name", t.agent_name},
             {"disposition", t.disposition},
             {"handover", t.handover},
             {"handover_reason", t.handover_reason ? Json(*t.handover_reason) : Json(nullptr)},
             {"trace", t.trace}};
}

// Working state of one handle_turn call.
struct CustomerServiceAgent::Turn {
    stores::SessionRecord session;
    std::string query_id;
    std::string text;  // profanity-filtered copy the agents see
    embed::Embedding embedding;
    std::int64_t started_at = 0;
    std::int64_t elapsed = 0;

    stores::QueryCacheEntry entry;
    std::optional<AgentResponse> winner;
    std::string reply;
    bool handover = false;
    std::optional<std::string> handover_reason;
};

CustomerServiceAgent::CustomerServiceAgent(registry::Registry &registry, stores::Stores &stores,
                                           select::Selector &selector, LogicalClock &clock, AppSettings settings)
    : registry_(registry),
      stores_(stores),
      selector_(selector),
      clock_(clock),
      settings_(std::move(settings)),
      query_ids_(settings_.app_id + "/q") {}

std::shared_ptr<std::mutex> CustomerServiceAgent::session_lock(const std::string &session_id) {
    std::lock_guard lock(locks_mutex_);
    auto &slot = session_locks_[session_id];
    if (!slot) slot = std::make_shared<std::mutex>();
    return slot;
}

std::string CustomerServiceAgent::greeting_for(const std::string &user_id) const {
    if (auto profile = stores_.users.profile(user_id)) {
        auto it = settings_.persona_greetings.find(profile->persona_hint);
        if (it != settings_.persona_greetings.end()) return it->second;
    }
    return settings_.greeting;
}

void CustomerServiceAgent::sync_query_ids() {
    const std::string prefix = settings_.app_id + "/q-";
    std::uint64_t highest = 0;
    for (const auto &e : stores_.queries.all()) {
        if (e.query_id.rfind(prefix, 0) != 0) continue;
        try {
            highest = std::max<std::uint64_t>(highest, std::stoull(e.query_id.substr(prefix.size())));
        } catch (const std::exception &) {
        }
    }
    query_ids_.bump_past(highest);
}

select::SelectionRequest CustomerServiceAgent::request_for(const Turn &turn) const {
    select::SelectionRequest r;
    r.query_id = turn.query_id;
    r.session_id = turn.session.session_id;
    r.utterance = turn.text;
    r.embedding = turn.embedding;
    r.scope = registry::Scope::app(settings_.app_id);
    r.strategy = settings_.selection.strategy;
    r.gather_window_ms = settings_.selection.gather_window_ms;
    r.k = settings_.selection.k;
    r.similarity_floor = settings_.selection.similarity_floor;
    r.policy = settings_.selection.policy;
    r.context = turn.session.context;
    r.channel_id = turn.session.channel_id;
    r.session_status = turn.session.status;
    r.sent_at = turn.started_at + turn.elapsed;
    return r;
}

void CustomerServiceAgent::forward_to_human(Turn &turn) {
    turn.entry.strategy = Strategy::direct_to_bound;
    if (!settings_.human_agent_id || !registry_.has_agent(*settings_.human_agent_id)) return;
    auto request = request_for(turn);
    request.session_status = SessionStatus::handed_over;
    auto direct = selector_.ask_direct(*settings_.human_agent_id, request);
    turn.elapsed += direct.elapsed_ms;
    if (!direct.response) return;
    turn.entry.gathered.push_back(*direct.response);
    if (direct.response->disposition == Disposition::in_scope) turn.winner = *direct.response;
}

void CustomerServiceAgent::hand_over(Turn &turn, HandoverReason reason) {
    stores_.sessions.hand_over(turn.session.session_id, *settings_.human_agent_id);
    turn.session = stores_.sessions.get(turn.session.session_id);
    turn.handover = true;
    turn.handover_reason = std::string(to_string(reason));
    forward_to_human(turn);
    turn.reply = settings_.handover_message;
}

std::optional<HandoverReason> CustomerServiceAgent::trigger_handover(const std::string &session_id,
                                                                     std::string_view text) {
    if (!settings_.human_agent_id) return std::nullopt;
    const auto session = stores_.sessions.get(session_id);
    if (session.status != SessionStatus::active) return std::nullopt;
    auto reason = handover_reason(session, text, settings_.handover);
    if (reason) stores_.sessions.hand_over(session_id, *settings_.human_agent_id);
    return reason;
}

TurnResult CustomerServiceAgent::handle_turn(const std::string &session_id, const std::string &raw_text) {
    auto guard = session_lock(session_id);
    std::lock_guard lock(*guard);

    Turn turn;
    turn.session = stores_.sessions.get(session_id);
    if (turn.session.status == SessionStatus::closed) {
        throw Error(ErrorCode::session_closed, "session " + session_id + " is closed");
    }
    if (turn.session.app_id != settings_.app_id) {
        throw Error(ErrorCode::unknown_session, "session " + session_id + " belongs to another app");
    }

    turn.query_id = query_ids_.next();
    turn.started_at = clock_.now();
    // The cache applies PII redaction itself for sensitive apps.
    turn.entry.query_id = turn.query_id;
    turn.entry.session_id = session_id;
    turn.entry.utterance_stored = raw_text;
    turn.entry.policy_used = settings_.selection.policy;

    turn.text = profanity_filter(raw_text, settings_.lexicons.profanity).clean_text;
    turn.embedding = embed::embed_text(turn.text);
    turn.entry.embedding = turn.embedding;
    stores_.sessions.set_sentiment(session_id, sentiment_score(turn.text, settings_.lexicons));
    turn.session = stores_.sessions.get(session_id);

    if (turn.session.status == SessionStatus::handed_over) {
        forward_to_human(turn);
        turn.reply = turn.winner ? turn.winner->reply_text : settings_.handover_message;
        return finish(turn);
    }

    if (settings_.human_agent_id) {
        if (auto reason = handover_reason(turn.session, turn.text, settings_.handover)) {
            hand_over(turn, *reason);
            return finish(turn);
        }
    }

    if (!turn.session.serving_agent_id) {
        if (auto rule = stores_.routing.routing_rule_for(turn.session.user_id)) {
            const auto d = registry_.descriptor(rule->preferred_agent_id);
            if (d.app_id == settings_.app_id && !d.parent_pod) {
                stores_.sessions.bind_serving_agent(session_id, rule->preferred_agent_id);
                turn.session = stores_.sessions.get(session_id);
            }
        }
    }

    bool agent_asked_handover = false;
    if (auto bound = turn.session.serving_agent_id) {
        if (!registry_.has_agent(*bound)) {
            stores_.sessions.unbind(session_id);
        } else {
            auto direct = selector_.ask_direct(*bound, request_for(turn));
            turn.elapsed += direct.elapsed_ms;
            turn.entry.strategy = Strategy::direct_to_bound;
            if (direct.response) turn.entry.gathered.push_back(*direct.response);
            if (direct.response && direct.response->disposition == Disposition::in_scope) {
                turn.winner = *direct.response;
            } else {
                agent_asked_handover =
                    direct.response && direct.response->disposition == Disposition::handover_request;
                stores_.sessions.unbind(session_id);
            }
        }
        turn.session = stores_.sessions.get(session_id);
    }

    if (agent_asked_handover && settings_.human_agent_id) {
        hand_over(turn, HandoverReason::agent_request);
        return finish(turn);
    }

    if (!turn.winner) {
        auto outcome = selector_.select(request_for(turn));
        turn.elapsed += outcome.elapsed_ms;
        turn.entry.strategy = outcome.strategy_executed;
        turn.entry.gathered.insert(turn.entry.gathered.end(), outcome.gathered.begin(), outcome.gathered.end());
        if (outcome.winner) {
            turn.winner = outcome.winner;
            stores_.sessions.bind_serving_agent(session_id, outcome.winner->agent_id);
        }
    }

    if (turn.winner) {
        std::vector<std::string> intents;
        if (turn.winner->intent) intents.push_back(*turn.winner->intent);
        stores_.sessions.merge_context(session_id, intents, turn.winner->entities);
        stores_.sessions.reset_oos(session_id);
        turn.reply = turn.winner->reply_text;
        return finish(turn);
    }

    const int oos = stores_.sessions.increment_oos(session_id);
    turn.session = stores_.sessions.get(session_id);
    if (settings_.human_agent_id && oos >= settings_.handover.oos_threshold) {
        hand_over(turn, HandoverReason::repeated_oos);
        return finish(turn);
    }
    turn.reply = settings_.fallback_message;
    return finish(turn);
}

TurnResult CustomerServiceAgent::finish(Turn &turn) {
    TurnResult result;
    result.query_id = turn.query_id;
    result.reply_text = turn.reply;
    result.handover = turn.handover;
    result.handover_reason = turn.handover_reason;
    for (const auto &r : turn.entry.gathered) {
        result.trace.push_back({r.agent_id, r.disposition, r.confidence, r.latency_ms, r.served_by});
    }

    if (turn.winner) {
        result.agent_id = turn.winner->agent_id;
        result.disposition = turn.winner->disposition;
        turn.entry.selected_agent_id = turn.winner->agent_id;
    } else if (turn.handover) {
        result.agent_id = *settings_.human_agent_id;
        result.disposition = Disposition::in_scope;
    }
    if (!result.agent_id.empty() && registry_.has_agent(result.agent_id)) {
        result.agent_name = registry_.descriptor(result.agent_id).name;
    }

    stores_.queries.log_query(std::move(turn.entry));
    clock_.advance(std::max<std::int64_t>(1, turn.elapsed));
    return result;
}

}  // namespace lpar::orchestrate
