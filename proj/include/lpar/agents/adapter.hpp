#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "lpar/common/types.hpp"

namespace lpar::agents {

// How a query reached the node. Selection rounds (broadcast or multicast)
// ask "can you take this?"; direct deliveries continue a bound dialog.
enum class DeliveryMode { selection, direct };

struct AgentCall {
    std::string agent_id;
    std::string query_id;
    std::string session_id;
    std::string utterance;
    ContextSnapshot context;
    std::string channel_id;
    SessionStatus session_status = SessionStatus::active;
    DeliveryMode mode = DeliveryMode::selection;
    std::int64_t sent_at = 0;
};

// Per-call logical stopwatch. Implementations charge their processing time
// with sleep(); nothing here blocks a real thread.
class CallTimer {
public:
    void sleep(std::int64_t ms) { elapsed_ += ms < 0 ? 0 : ms; }
    [[nodiscard]] std::int64_t elapsed() const noexcept { return elapsed_; }

private:
    std::int64_t elapsed_ = 0;
};

// What an adapter extracts from its implementation's native reply.
struct Verdict {
    Disposition disposition = Disposition::out_of_scope;
    std::optional<double> confidence;  // absent means "no opinion"
    std::optional<std::string> intent;
    EntityMap entities;
    std::string reply_text;
};

// The only component that speaks an implementation's native protocol.
// Throwing signals a malformed or failed call.
class Adapter {
public:
    virtual ~Adapter() = default;
    virtual Verdict handle(const AgentCall &call, CallTimer &timer) = 0;
};

inline constexpr std::int64_t default_adapter_budget_ms = 1500;
inline constexpr double default_confidence = 0.5;

struct AdapterOptions {
    std::int64_t budget_ms = default_adapter_budget_ms;
    // Fixed processing cost charged before the implementation runs.
    std::int64_t processing_ms = 0;
};

// Runs the adapter and maps every outcome onto one well-formed response:
//   answer      confidence clamped to [0,1], missing confidence -> 0.5
//   refusal     out_of_scope, intent dropped
//   timeout     out_of_scope, confidence 0, latency = budget
//   exception   out_of_scope, confidence 0
// Out-of-scope replies never carry an intent.
AgentResponse invoke_adapter(Adapter &adapter, const AgentCall &call, const AdapterOptions &options);

}  // namespace lpar::agents
