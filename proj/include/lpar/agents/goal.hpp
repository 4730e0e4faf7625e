#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lpar/common/json.hpp"
#include "lpar/common/types.hpp"

namespace lpar::agents {

// Slot value checkers. Each returns the normalized value or nothing.
//   text            1-4 tokens, returned trimmed
//   account_number  a run of 6-12 digits anywhere in the utterance
//   amount          the first number, optionally with a currency sign
std::optional<std::string> validate_slot(std::string_view validator, std::string_view utterance);
bool known_validator(std::string_view validator);

// True for "who are you" style questions every kit agent answers.
bool is_identify_request(std::string_view utterance);
inline constexpr const char *identify_intent = "identify_yourself";
inline constexpr double identify_confidence = 0.9;
inline constexpr double slot_fill_confidence = 0.9;

struct SlotSpec {
    std::string name;
    std::string prompt;
    std::string validator = "text";
};

struct IntentSpec {
    std::string name;
    // A phrase matches when every one of its tokens occurs in the utterance.
    std::vector<std::string> phrases;
    std::vector<SlotSpec> slots;
    // Asked once all slots are filled; "{slot}" placeholders are expanded.
    std::optional<std::string> confirm_prompt;
    // "{slot}" placeholders plus "{reference}", a stable hash of the values.
    std::string fulfillment;
};

struct GoalSpec {
    std::string agent_name;
    std::string description;
    std::vector<IntentSpec> intents;
};

enum class FrameState { collecting, confirming, fulfilled };

struct SlotFrame {
    struct Slot {
        std::string name;
        std::string prompt;
        std::string validator;
        std::optional<std::string> value;

        friend bool operator==(const Slot &, const Slot &) = default;
    };

    std::string intent;  // empty while idle
    std::vector<Slot> slots;
    FrameState state = FrameState::fulfilled;

    [[nodiscard]] bool idle() const noexcept { return intent.empty(); }
    [[nodiscard]] bool open() const noexcept { return !idle() && state != FrameState::fulfilled; }

    friend bool operator==(const SlotFrame &, const SlotFrame &) = default;
};

void to_json(Json &j, const SlotFrame &f);
void from_json(const Json &j, SlotFrame &f);

struct IntentMatch {
    const IntentSpec *intent = nullptr;
    double confidence = 0.0;
};

// Best keyword match; confidence = min(1, 0.7 + 0.3 * phrase tokens / utterance tokens).
IntentMatch match_intent(const GoalSpec &spec, std::string_view utterance);

struct GoalStep {
    AgentResponse response;
    SlotFrame frame;
};

// One dialog turn. An open frame first tries to take the utterance as the
// next slot value (or the yes/no answer when confirming). Otherwise a
// keyword-matched intent starts a fresh frame whose slots are pre-filled
// from same-named context entities. Anything else is out of scope and drops
// the frame. In-scope replies carry every filled slot as an entity.
GoalStep goal_agent_step(const GoalSpec &spec, SlotFrame frame, std::string_view utterance,
                         const ContextSnapshot &context);

// Goal-oriented kit agent with per-session frames behind a JSON dialog
// endpoint. Request: {session, text, restart, context:{entities}}. Reply:
// {status: handled|not_handled, score, intent, slots:{}, speech}.
class GoalAgent {
public:
    explicit GoalAgent(GoalSpec spec) : spec_(std::move(spec)) {}

    Json dialog(const Json &request);

    [[nodiscard]] const GoalSpec &spec() const noexcept { return spec_; }
    [[nodiscard]] std::optional<SlotFrame> frame(const std::string &session_id) const;
    void set_frame(const std::string &session_id, SlotFrame frame);

private:
    GoalSpec spec_;
    mutable std::mutex mutex_;
    std::map<std::string, SlotFrame> frames_;
};

}  // namespace lpar::agents
