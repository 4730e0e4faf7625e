#pragma once

#include <json.hpp>

#include "lpar/common/types.hpp"

namespace lpar {

// Insertion-ordered JSON keeps serialized records stable and diffable.
using Json = nlohmann::ordered_json;

void to_json(Json &j, const EntityMap &m);
void from_json(const Json &j, EntityMap &m);
void to_json(Json &j, const ContextSnapshot &c);
void from_json(const Json &j, ContextSnapshot &c);
void to_json(Json &j, const AgentResponse &r);
void from_json(const Json &j, AgentResponse &r);

void to_json(Json &j, Disposition d);
void from_json(const Json &j, Disposition &d);
void to_json(Json &j, Rating r);
void from_json(const Json &j, Rating &r);
void to_json(Json &j, SessionStatus s);
void from_json(const Json &j, SessionStatus &s);

void to_json(Json &j, Strategy s);
void from_json(const Json &j, Strategy &s);
void to_json(Json &j, PolicyId p);
void from_json(const Json &j, PolicyId &p);

std::optional<Strategy> parse_strategy(std::string_view s);
// Accepts the policy names and the short forms "P1", "P2", "P3".
std::optional<PolicyId> parse_policy(std::string_view s);
std::optional<Disposition> parse_disposition(std::string_view s);
std::optional<Rating> parse_rating(std::string_view s);
std::optional<SessionStatus> parse_session_status(std::string_view s);

}  // namespace lpar
