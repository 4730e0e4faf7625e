#include "lpar/common/json.hpp"

#include "lpar/common/error.hpp"

namespace lpar {

namespace {

template <typename Enum>
Enum parse_or_throw(const Json &j, std::optional<Enum> (*parse)(std::string_view), const char *what) {
    const auto s = j.get<std::string>();
    if (auto v = parse(s)) return *v;
    throw Error(ErrorCode::parse_error, std::string("invalid ") + what + ": " + s);
}

}  // namespace

std::optional<Disposition> parse_disposition(std::string_view s) {
    for (auto d : {Disposition::in_scope, Disposition::out_of_scope, Disposition::handover_request}) {
        if (to_string(d) == s) return d;
    }
    return std::nullopt;
}

std::optional<Rating> parse_rating(std::string_view s) {
    for (auto r : {Rating::Beginner, Rating::Intermediate, Rating::Professional, Rating::Expert}) {
        if (to_string(r) == s) return r;
    }
    return std::nullopt;
}

std::optional<SessionStatus> parse_session_status(std::string_view s) {
    for (auto st : {SessionStatus::active, SessionStatus::handed_over, SessionStatus::closed}) {
        if (to_string(st) == s) return st;
    }
    return std::nullopt;
}

std::optional<Strategy> parse_strategy(std::string_view s) {
    for (auto st : {Strategy::broadcast_only, Strategy::search_and_multicast, Strategy::direct_to_bound}) {
        if (to_string(st) == s) return st;
    }
    return std::nullopt;
}

std::optional<PolicyId> parse_policy(std::string_view s) {
    if (s == "P1") return PolicyId::highest_confidence;
    if (s == "P2") return PolicyId::rating_weighted;
    if (s == "P3") return PolicyId::fastest_eligible;
    for (auto p : {PolicyId::highest_confidence, PolicyId::rating_weighted, PolicyId::fastest_eligible}) {
        if (to_string(p) == s) return p;
    }
    return std::nullopt;
}

void to_json(Json &j, Strategy s) { j = std::string(to_string(s)); }
void from_json(const Json &j, Strategy &s) { s = parse_or_throw(j, &parse_strategy, "strategy"); }
void to_json(Json &j, PolicyId p) { j = std::string(to_string(p)); }
void from_json(const Json &j, PolicyId &p) { p = parse_or_throw(j, &parse_policy, "policy"); }

void to_json(Json &j, Disposition d) { j = std::string(to_string(d)); }
void from_json(const Json &j, Disposition &d) { d = parse_or_throw(j, &parse_disposition, "disposition"); }
void to_json(Json &j, Rating r) { j = std::string(to_string(r)); }
void from_json(const Json &j, Rating &r) { r = parse_or_throw(j, &parse_rating, "rating"); }
void to_json(Json &j, SessionStatus s) { j = std::string(to_string(s)); }
void from_json(const Json &j, SessionStatus &s) { s = parse_or_throw(j, &parse_session_status, "session status"); }

void to_json(Json &j, const EntityMap &m) {
    j = Json::object();
    for (const auto &[k, v] : m) j[k] = v;
}

void from_json(const Json &j, EntityMap &m) {
    m = EntityMap{};
    for (const auto &[k, v] : j.items()) m.set(k, v.get<std::string>());
}

void to_json(Json &j, const ContextSnapshot &c) { j = Json{{"intents", c.intents}, {"entities", c.entities}}; }

void from_json(const Json &j, ContextSnapshot &c) {
    c.intents = j.value("intents", std::vector<std::string>{});
    c.entities = j.contains("entities") ? j.at("entities").get<EntityMap>() : EntityMap{};
}

void to_json(Json &j, const AgentResponse &r) {
    j = Json{{"agent_id", r.agent_id},
             {"query_id", r.query_id},
             {"session_id", r.session_id},
             {"disposition", r.disposition},
             {"confidence", r.confidence},
             {"intent", r.intent ? Json(*r.intent) : Json(nullptr)},
             {"entities", r.entities},
             {"reply_text", r.reply_text},
             {"latency_ms", r.latency_ms}};
    if (r.served_by) j["served_by"] = *r.served_by;
}

void from_json(const Json &j, AgentResponse &r) {
    r.agent_id = j.at("agent_id").get<std::string>();
    r.query_id = j.value("query_id", std::string{});
    r.session_id = j.value("session_id", std::string{});
    r.disposition = j.at("disposition").get<Disposition>();
    r.confidence = j.value("confidence", 0.0);
    r.intent = j.contains("intent") && !j.at("intent").is_null() ? std::optional(j.at("intent").get<std::string>()) : std::nullopt;
    r.entities = j.contains("entities") ? j.at("entities").get<EntityMap>() : EntityMap{};
    r.reply_text = j.value("reply_text", std::string{});
    r.latency_ms = j.value("latency_ms", 0.0);
    r.served_by = j.contains("served_by") ? std::optional(j.at("served_by").get<std::string>()) : std::nullopt;
}

}  // namespace lpar
