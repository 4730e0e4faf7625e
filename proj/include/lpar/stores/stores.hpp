#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lpar/common/clock.hpp"
#include "lpar/registry/registry.hpp"
#include "lpar/stores/records.hpp"

namespace lpar::stores {

// Under 3 samples the band is always Beginner; otherwise the running mean
// maps to Beginner (< 2), Intermediate (< 3), Professional (< 4) or Expert.
Rating rating_band(double mean_score, std::size_t sample_count);

inline constexpr std::size_t rating_sample_floor = 3;

class SessionStore {
public:
    SessionStore(const registry::Registry &registry, LogicalClock &clock);

    SessionRecord open_session(const std::string &app_id, const std::string &user_id, const std::string &channel_id);
    [[nodiscard]] SessionRecord get(std::string_view session_id) const;
    [[nodiscard]] bool contains(std::string_view session_id) const;
    [[nodiscard]] std::vector<SessionRecord> all() const;
    // Most recently created live session of the user in the app.
    [[nodiscard]] std::optional<std::string> live_session_for(std::string_view app_id, std::string_view user_id) const;

    void bind_serving_agent(const std::string &session_id, const std::string &agent_id);
    void unbind(const std::string &session_id);
    // Clears every live session bound to the agent; returns their ids.
    std::vector<std::string> unbind_agent(const std::string &agent_id);

    ContextSnapshot merge_context(const std::string &session_id, const std::vector<std::string> &intents,
                                  const EntityMap &entities);
    void set_sentiment(const std::string &session_id, double sentiment);
    int increment_oos(const std::string &session_id);
    void reset_oos(const std::string &session_id);

    // active -> handed_over, bound to the human-connect agent.
    void hand_over(const std::string &session_id, const std::string &human_agent_id);
    // active|handed_over -> closed.
    void close(const std::string &session_id);

    std::vector<Json> drain_changes();
    void restore(const Json &record);

private:
    SessionRecord &live_locked(std::string_view session_id);
    SessionRecord &at_locked(std::string_view session_id);
    void touch_locked(SessionRecord &record);

    const registry::Registry &registry_;
    LogicalClock &clock_;
    IdGenerator ids_{"s"};
    mutable std::mutex mutex_;
    std::map<std::string, SessionRecord, std::less<>> sessions_;
    std::set<std::string> dirty_;
};

// Append-only per-turn log. Entries are immutable once written.
class QueryCache {
public:
    QueryCache(const registry::Registry &registry, const SessionStore &sessions);

    // Sensitive apps get the PII-redacted utterance regardless of input.
    void log_query(QueryCacheEntry entry);
    [[nodiscard]] std::vector<QueryCacheEntry> get_queries(std::string_view session_id) const;
    [[nodiscard]] std::vector<QueryCacheEntry> all() const;

    std::vector<Json> drain_changes();
    void restore(const Json &record);

private:
    const registry::Registry &registry_;
    const SessionStore &sessions_;
    mutable std::mutex mutex_;
    std::vector<QueryCacheEntry> entries_;
    std::size_t written_ = 0;
};

class FeedbackStore {
public:
    explicit FeedbackStore(registry::Registry &registry);

    // Updates the running mean and pushes the new band to the registry.
    Rating record_feedback(const FeedbackRecord &record);
    [[nodiscard]] std::optional<RatingState> rating_state(std::string_view agent_id) const;
    [[nodiscard]] std::vector<RatingState> ratings() const;
    [[nodiscard]] std::vector<FeedbackRecord> records() const;
    // Re-applies stored bands to agents present in the registry.
    void sync_registry() const;

    std::vector<Json> drain_feedback_changes();
    std::vector<Json> drain_rating_changes();
    void restore_feedback(const Json &record);
    void restore_rating(const Json &record);

private:
    struct Tally {
        long long sum = 0;
        std::size_t count = 0;
    };

    registry::Registry &registry_;
    mutable std::mutex mutex_;
    std::vector<FeedbackRecord> records_;
    std::size_t written_ = 0;
    std::map<std::string, Tally, std::less<>> tallies_;
    std::set<std::string> dirty_;
};

class UserStore {
public:
    // Returns the profile mapped to the channel identity, provisioning a new
    // one on first contact.
    UserProfile resolve_user(const std::string &channel_id, const std::string &channel_local_id);
    // Maps an extra channel identity onto an existing or new profile.
    void link_identity(const std::string &user_id, const std::string &channel_id, const std::string &channel_local_id);
    void upsert(const UserProfile &profile);
    [[nodiscard]] std::optional<UserProfile> profile(std::string_view user_id) const;
    [[nodiscard]] std::vector<UserProfile> all() const;

    std::vector<Json> drain_changes();
    void restore(const Json &record);

private:
    void index_locked(const UserProfile &profile);

    mutable std::mutex mutex_;
    IdGenerator ids_{"u"};
    std::map<std::string, UserProfile, std::less<>> users_;
    std::map<std::pair<std::string, std::string>, std::string> by_identity_;
    std::set<std::string> dirty_;
};

class RoutingStore {
public:
    explicit RoutingStore(const registry::Registry &registry);

    void set_rule(const RoutingRule &rule);
    // Absent when no rule exists or its agent is no longer registered.
    [[nodiscard]] std::optional<RoutingRule> routing_rule_for(std::string_view user_id) const;
    [[nodiscard]] std::vector<RoutingRule> all() const;

    std::vector<Json> drain_changes();
    void restore(const Json &record);

private:
    const registry::Registry &registry_;
    mutable std::mutex mutex_;
    std::map<std::string, RoutingRule, std::less<>> rules_;
    std::set<std::string> dirty_;
};

// All stores with snapshot persistence: `<dir>/<store>.jsonl`, one JSON
// record per line. Snapshots append the records changed since the previous
// snapshot; loading replays every line with the last record per key winning.
class Stores {
public:
    Stores(registry::Registry &registry, LogicalClock &clock);

    void snapshot(const std::filesystem::path &dir);
    void load(const std::filesystem::path &dir);

    SessionStore sessions;
    QueryCache queries;
    FeedbackStore feedback;
    UserStore users;
    RoutingStore routing;
};

}  // namespace lpar::stores
