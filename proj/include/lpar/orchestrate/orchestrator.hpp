#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lpar/common/clock.hpp"
#include "lpar/common/json.hpp"
#include "lpar/orchestrate/text_services.hpp"
#include "lpar/registry/registry.hpp"
#include "lpar/select/selector.hpp"
#include "lpar/stores/stores.hpp"

namespace lpar::orchestrate {

enum class HandoverReason { explicit_request, low_sentiment, repeated_oos, agent_request };

std::string_view to_string(HandoverReason reason) noexcept;

struct HandoverSettings {
    std::vector<std::string> phrases = {"talk to a human", "speak to an agent"};
    double sentiment_threshold = -0.5;  // fires strictly below
    int oos_threshold = 3;              // fires at or above
};

struct SelectionSettings {
    Strategy strategy = Strategy::search_and_multicast;
    std::size_t k = 3;
    double similarity_floor = 0.1;
    PolicyId policy = PolicyId::highest_confidence;
    std::int64_t gather_window_ms = 2000;
};

struct AppSettings {
    std::string app_id;
    SelectionSettings selection;
    HandoverSettings handover;
    Lexicons lexicons = Lexicons::defaults();
    // Agent that takes over handed-over sessions; without one, handover
    // triggers are never evaluated.
    std::optional<std::string> human_agent_id;
    std::string fallback_message = "I could not find anyone to help with that yet.";
    std::string handover_message = "I am connecting you with a member of our team. Please stay on this chat.";
    std::string greeting = "Hello! How can I help you today?";
    std::map<std::string, std::string> persona_greetings;  // persona_hint -> greeting
};

// First trigger that fires, checked in order: explicit phrase, sentiment
// below threshold, repeated out-of-scope count.
std::optional<HandoverReason> handover_reason(const stores::SessionRecord &session, std::string_view text,
                                              const HandoverSettings &settings);

struct TraceEntry {
    std::string agent_id;
    Disposition disposition = Disposition::out_of_scope;
    double confidence = 0.0;
    double latency_ms = 0.0;
    std::optional<std::string> served_by;

    friend bool operator==(const TraceEntry &, const TraceEntry &) = default;
};

struct TurnResult {
    std::string query_id;
    std::string reply_text;
    std::string agent_id;    // empty when nobody answered
    std::string agent_name;  // top-level node, so a pod reports its own name
    Disposition disposition = Disposition::out_of_scope;
    std::vector<TraceEntry> trace;
    bool handover = false;  // true only on the turn the handover happens
    std::optional<std::string> handover_reason;

    friend bool operator==(const TurnResult &, const TurnResult &) = default;
};

void to_json(Json &j, const TraceEntry &t);
void to_json(Json &j, const TurnResult &t);

// Front-line orchestrator for one app: owns the per-turn pipeline, the
// serving-agent binding and the handover rules. Turns on one session are
// serialized; different sessions run concurrently.
class CustomerServiceAgent {
public:
    CustomerServiceAgent(registry::Registry &registry, stores::Stores &stores, select::Selector &selector,
                         LogicalClock &clock, AppSettings settings);

    TurnResult handle_turn(const std::string &session_id, const std::string &raw_text);

    // Evaluates the triggers against the stored session and, when one fires,
    // hands the session over. Returns the reason.
    std::optional<HandoverReason> trigger_handover(const std::string &session_id, std::string_view text);

    [[nodiscard]] std::string greeting_for(const std::string &user_id) const;
    // Continues query numbering after entries reloaded into the cache.
    void sync_query_ids();
    [[nodiscard]] const AppSettings &settings() const noexcept { return settings_; }

private:
    struct Turn;

    std::shared_ptr<std::mutex> session_lock(const std::string &session_id);
    select::SelectionRequest request_for(const Turn &turn) const;
    void forward_to_human(Turn &turn);
    void hand_over(Turn &turn, HandoverReason reason);
    TurnResult finish(Turn &turn);

    registry::Registry &registry_;
    stores::Stores &stores_;
    select::Selector &selector_;
    LogicalClock &clock_;
    AppSettings settings_;
    IdGenerator query_ids_{"q"};
    std::mutex locks_mutex_;
    std::map<std::string, std::shared_ptr<std::mutex>> session_locks_;
};

}  // namespace lpar::orchestrate
