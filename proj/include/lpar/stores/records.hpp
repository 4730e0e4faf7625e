#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lpar/common/json.hpp"
#include "lpar/common/types.hpp"
#include "lpar/embed/embedding.hpp"

namespace lpar::stores {

struct SessionRecord {
    std::string session_id;
    std::string app_id;
    std::string user_id;
    std::string channel_id;
    std::optional<std::string> serving_agent_id;
    ContextSnapshot context;
    int consecutive_oos = 0;
    double last_sentiment = 0.0;
    SessionStatus status = SessionStatus::active;
    std::int64_t created_at = 0;
    std::int64_t updated_at = 0;

    friend bool operator==(const SessionRecord &, const SessionRecord &) = default;
};

// Audit row for one user turn.
struct QueryCacheEntry {
    std::string query_id;
    std::string session_id;
    std::string utterance_stored;
    embed::Embedding embedding;
    Strategy strategy = Strategy::direct_to_bound;
    std::vector<AgentResponse> gathered;
    std::optional<std::string> selected_agent_id;
    PolicyId policy_used = PolicyId::highest_confidence;

    friend bool operator==(const QueryCacheEntry &, const QueryCacheEntry &) = default;
};

struct FeedbackRecord {
    std::string session_id;
    std::string agent_id;
    int score = 0;
    std::string comment;

    friend bool operator==(const FeedbackRecord &, const FeedbackRecord &) = default;
};

struct RatingState {
    std::string agent_id;
    double mean_score = 0.0;
    std::size_t sample_count = 0;

    friend bool operator==(const RatingState &, const RatingState &) = default;
};

struct UserProfile {
    std::string user_id;
    std::map<std::string, std::string> channel_identities;  // channel -> channel-local id
    std::string persona_hint;

    friend bool operator==(const UserProfile &, const UserProfile &) = default;
};

struct RoutingRule {
    std::string user_id;
    std::string preferred_agent_id;
    std::string reason;

    friend bool operator==(const RoutingRule &, const RoutingRule &) = default;
};

void to_json(Json &j, const SessionRecord &r);
void from_json(const Json &j, SessionRecord &r);
void to_json(Json &j, const QueryCacheEntry &e);
void from_json(const Json &j, QueryCacheEntry &e);
void to_json(Json &j, const FeedbackRecord &r);
void from_json(const Json &j, FeedbackRecord &r);
void to_json(Json &j, const RatingState &r);
void from_json(const Json &j, RatingState &r);
void to_json(Json &j, const UserProfile &p);
void from_json(const Json &j, UserProfile &p);
void to_json(Json &j, const RoutingRule &r);
void from_json(const Json &j, RoutingRule &r);

}  // namespace lpar::stores
