#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lpar {

enum class Disposition { in_scope, out_of_scope, handover_request };

enum class Rating { Beginner, Intermediate, Professional, Expert };

enum class SessionStatus { active, handed_over, closed };

// How a query reached the agent that answered it.
enum class Strategy { broadcast_only, search_and_multicast, direct_to_bound };

// Response selection policies.
enum class PolicyId { highest_confidence, rating_weighted, fastest_eligible };

std::string_view to_string(Disposition d) noexcept;
std::string_view to_string(Rating r) noexcept;
std::string_view to_string(SessionStatus s) noexcept;
std::string_view to_string(Strategy s) noexcept;
std::string_view to_string(PolicyId p) noexcept;

// String map that remembers insertion order. Re-setting a key moves it to the
// back, so the front is always the least recently written entry.
class EntityMap {
public:
    using value_type = std::pair<std::string, std::string>;
    using const_iterator = std::vector<value_type>::const_iterator;

    EntityMap() = default;
    EntityMap(std::initializer_list<value_type> init) {
        for (const auto &[k, v] : init) set(k, v);
    }

    void set(std::string key, std::string value);
    [[nodiscard]] std::optional<std::string> get(std::string_view key) const;
    [[nodiscard]] bool contains(std::string_view key) const { return get(key).has_value(); }
    void erase_oldest();

    [[nodiscard]] std::size_t size() const noexcept { return items_.size(); }
    [[nodiscard]] bool empty() const noexcept { return items_.empty(); }
    [[nodiscard]] const_iterator begin() const noexcept { return items_.begin(); }
    [[nodiscard]] const_iterator end() const noexcept { return items_.end(); }

    friend bool operator==(const EntityMap &, const EntityMap &) = default;

private:
    std::vector<value_type> items_;
};

struct ContextSnapshot {
    static constexpr std::size_t max_intents = 50;
    static constexpr std::size_t max_entities = 100;

    std::vector<std::string> intents;  // most recent last
    EntityMap entities;

    friend bool operator==(const ContextSnapshot &, const ContextSnapshot &) = default;
};

// An agent's verdict on one query.
struct AgentResponse {
    std::string agent_id;
    std::string query_id;
    std::string session_id;
    Disposition disposition = Disposition::out_of_scope;
    double confidence = 0.0;
    std::optional<std::string> intent;
    EntityMap entities;
    std::string reply_text;
    double latency_ms = 0.0;
    // Set when a pod relays a member's answer: the member that produced it.
    std::optional<std::string> served_by;

    // The agent whose rating, latency and id break policy ties.
    [[nodiscard]] const std::string &effective_agent() const noexcept {
        return served_by ? *served_by : agent_id;
    }

    friend bool operator==(const AgentResponse &, const AgentResponse &) = default;
};

}  // namespace lpar
