#include "lpar/stores/records.hpp"

namespace lpar::stores {

namespace {

Json optional_string(const std::optional<std::string> &v) { return v ? Json(*v) : Json(nullptr); }

std::optional<std::string> read_optional_string(const Json &j, const char *key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<std::string>();
}

}  // namespace

void to_json(Json &j, const SessionRecord &r) {
    j = Json{{"session_id", r.session_id},
             {"app_id", r.app_id},
             {"user_id", r.user_id},
             {"channel_id", r.channel_id},
             {"serving_agent_id", optional_string(r.serving_agent_id)},
             {"context", r.context},
             {"consecutive_oos", r.consecutive_oos},
             {"last_sentiment", r.last_sentiment},
             {"status", r.status},
             {"created_at", r.created_at},
             {"updated_at", r.updated_at}};
}

void from_json(const Json &j, SessionRecord &r) {
    r.session_id = j.at("session_id").get<std::string>();
    r.app_id = j.at("app_id").get<std::string>();
    r.user_id = j.at("user_id").get<std::string>();
    r.channel_id = j.at("channel_id").get<std::string>();
    r.serving_agent_id = read_optional_string(j, "serving_agent_id");
    r.context = j.at("context").get<ContextSnapshot>();
    r.consecutive_oos = j.at("consecutive_oos").get<int>();
    r.last_sentiment = j.at("last_sentiment").get<double>();
    r.status = j.at("status").get<SessionStatus>();
    r.created_at = j.at("created_at").get<std::int64_t>();
    r.updated_at = j.at("updated_at").get<std::int64_t>();
}

void to_json(Json &j, const QueryCacheEntry &e) {
    j = Json{{"query_id", e.query_id},
             {"session_id", e.session_id},
             {"utterance_stored", e.utterance_stored},
             {"embedding", e.embedding.values},
             {"strategy", e.strategy},
             {"gathered", e.gathered},
             {"selected_agent_id", optional_string(e.selected_agent_id)},
             {"policy_used", e.policy_used}};
}

void from_json(const Json &j, QueryCacheEntry &e) {
    e.query_id = j.at("query_id").get<std::string>();
    e.session_id = j.at("session_id").get<std::string>();
    e.utterance_stored = j.at("utterance_stored").get<std::string>();
    e.embedding.values = j.at("embedding").get<std::vector<double>>();
    e.strategy = j.at("strategy").get<Strategy>();
    e.gathered = j.at("gathered").get<std::vector<AgentResponse>>();
    e.selected_agent_id = read_optional_string(j, "selected_agent_id");
    e.policy_used = j.at("policy_used").get<PolicyId>();
}

void to_json(Json &j, const FeedbackRecord &r) {
    j = Json{{"session_id", r.session_id}, {"agent_id", r.agent_id}, {"score", r.score}, {"comment", r.comment}};
}

void from_json(const Json &j, FeedbackRecord &r) {
    r.session_id = j.value("session_id", std::string{});
    r.agent_id = j.at("agent_id").get<std::string>();
    r.score = j.at("score").get<int>();
    r.comment = j.value("comment", std::string{});
}

void to_json(Json &j, const RatingState &r) {
    j = Json{{"agent_id", r.agent_id}, {"mean_score", r.mean_score}, {"sample_count", r.sample_count}};
}

void from_json(const Json &j, RatingState &r) {
    r.agent_id = j.at("agent_id").get<std::string>();
    r.mean_score = j.at("mean_score").get<double>();
    r.sample_count = j.at("sample_count").get<std::size_t>();
}

void to_json(Json &j, const UserProfile &p) {
    Json identities = Json::object();
    for (const auto &[channel, local] : p.channel_identities) identities[channel] = local;
    j = Json{{"user_id", p.user_id}, {"channel_identities", identities}, {"persona_hint", p.persona_hint}};
}

void from_json(const Json &j, UserProfile &p) {
    p.user_id = j.at("user_id").get<std::string>();
    p.channel_identities.clear();
    if (j.contains("channel_identities")) {
        for (const auto &[channel, local] : j.at("channel_identities").items()) {
            p.channel_identities[channel] = local.get<std::string>();
        }
    }
    p.persona_hint = j.value("persona_hint", std::string{});
}

void to_json(Json &j, const RoutingRule &r) {
    j = Json{{"user_id", r.user_id}, {"preferred_agent_id", r.preferred_agent_id}, {"reason", r.reason}};
}

void from_json(const Json &j, RoutingRule &r) {
    r.user_id = j.at("user_id").get<std::string>();
    r.preferred_agent_id = j.at("preferred_agent_id").get<std::string>();
    r.reason = j.value("reason", std::string{});
}

}  // namespace lpar::stores
