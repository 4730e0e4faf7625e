#include "lpar/agents/goal.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <set>

#include "lpar/common/text.hpp"
#include "lpar/embed/embedding.hpp"

namespace lpar::agents {

namespace {

const std::vector<std::string> &identify_phrases() {
    static const std::vector<std::string> phrases = {"who are you", "what are you", "your name", "identify yourself",
                                                     "who am i talking to", "who is this"};
    return phrases;
}

const std::set<std::string> yes_words = {"yes", "y", "yeah", "yep", "confirm", "ok", "okay", "sure"};
const std::set<std::string> no_words = {"no", "n", "nope", "cancel", "stop"};

// Maximal runs of digit characters, in text order.
std::vector<std::string> digit_runs(std::string_view text) {
    std::vector<std::string> runs;
    std::string cur;
    for (char c : text) {
        if (std::isdigit(static_cast<unsigned char>(c))) {
            cur.push_back(c);
        } else if (!cur.empty()) {
            runs.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) runs.push_back(std::move(cur));
    return runs;
}

std::optional<std::string> first_amount(std::string_view text) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) continue;
        std::size_t j = i;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
        if (j + 1 < text.size() && text[j] == '.' && std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
            ++j;
            std::size_t decimals = 0;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j])) && decimals < 2) {
                ++j;
                ++decimals;
            }
        }
        return std::string(text.substr(i, j - i));
    }
    return std::nullopt;
}

std::string expand(std::string_view tmpl, const SlotFrame &frame) {
    std::string out(tmpl);
    std::string joined = frame.intent;
    for (const auto &slot : frame.slots) {
        const auto value = slot.value.value_or("");
        joined += "|" + value;
        const std::string key = "{" + slot.name + "}";
        for (auto pos = out.find(key); pos != std::string::npos; pos = out.find(key, pos + value.size())) {
            out.replace(pos, key.size(), value);
        }
    }
    const std::string ref_key = "{reference}";
    if (auto pos = out.find(ref_key); pos != std::string::npos) {
        char ref[16];
        std::snprintf(ref, sizeof ref, "%06llu",
                      static_cast<unsigned long long>(embed::fnv1a64(joined) % 1000000ULL));
        out.replace(pos, ref_key.size(), ref);
    }
    return out;
}

EntityMap filled_entities(const SlotFrame &frame) {
    EntityMap entities;
    for (const auto &slot : frame.slots) {
        if (slot.value) entities.set(slot.name, *slot.value);
    }
    return entities;
}

const IntentSpec *find_intent(const GoalSpec &spec, std::string_view name) {
    for (const auto &intent : spec.intents) {
        if (intent.name == name) return &intent;
    }
    return nullptr;
}

AgentResponse in_scope(const SlotFrame &frame, std::string intent, double confidence, std::string reply) {
    AgentResponse r;
    r.disposition = Disposition::in_scope;
    r.confidence = confidence;
    r.intent = std::move(intent);
    r.entities = filled_entities(frame);
    r.reply_text = std::move(reply);
    return r;
}

// Prompts for the next empty slot, asks for confirmation, or fulfils.
GoalStep advance(const IntentSpec &intent, SlotFrame frame, double confidence) {
    for (const auto &slot : frame.slots) {
        if (!slot.value) {
            frame.state = FrameState::collecting;
            auto r = in_scope(frame, intent.name, confidence, slot.prompt);
            return {std::move(r), std::move(frame)};
        }
    }
    if (intent.confirm_prompt && frame.state == FrameState::collecting) {
        frame.state = FrameState::confirming;
        auto r = in_scope(frame, intent.name, confidence, expand(*intent.confirm_prompt, frame));
        return {std::move(r), std::move(frame)};
    }
    frame.state = FrameState::fulfilled;
    auto r = in_scope(frame, intent.name, confidence, expand(intent.fulfillment, frame));
    return {std::move(r), std::move(frame)};
}

GoalStep start(const IntentSpec &intent, double confidence, const ContextSnapshot &context) {
    SlotFrame frame;
    frame.intent = intent.name;
    frame.state = FrameState::collecting;
    for (const auto &spec : intent.slots) {
        SlotFrame::Slot slot{spec.name, spec.prompt, spec.validator, std::nullopt};
        if (auto carried = context.entities.get(spec.name)) slot.value = validate_slot(spec.validator, *carried);
        frame.slots.push_back(std::move(slot));
    }
    return advance(intent, std::move(frame), confidence);
}

GoalStep out_of_scope() {
    AgentResponse r;
    r.disposition = Disposition::out_of_scope;
    r.confidence = 0.0;
    return {std::move(r), SlotFrame{}};
}

}  // namespace

bool known_validator(std::string_view validator) {
    return validator == "text" || validator == "account_number" || validator == "amount";
}

std::optional<std::string> validate_slot(std::string_view validator, std::string_view utterance) {
    if (validator == "account_number") {
        for (auto &run : digit_runs(utterance)) {
            if (run.size() >= 6 && run.size() <= 12) return run;
        }
        return std::nullopt;
    }
    if (validator == "amount") return first_amount(utterance);
    if (validator == "text") {
        const auto tokens = tokenize(utterance);
        if (tokens.empty() || tokens.size() > 4) return std::nullopt;
        return trim(utterance);
    }
    return std::nullopt;
}

bool is_identify_request(std::string_view utterance) {
    return std::any_of(identify_phrases().begin(), identify_phrases().end(),
                       [&](const std::string &p) { return contains_phrase(utterance, p); });
}

IntentMatch match_intent(const GoalSpec &spec, std::string_view utterance) {
    const auto tokens = tokenize(utterance);
    if (tokens.empty()) return {};
    const std::set<std::string> present(tokens.begin(), tokens.end());

    IntentMatch best;
    for (const auto &intent : spec.intents) {
        for (const auto &phrase : intent.phrases) {
            const auto needed = tokenize(phrase);
            if (needed.empty()) continue;
            const bool all = std::all_of(needed.begin(), needed.end(), [&](const auto &t) { return present.count(t); });
            if (!all) continue;
            const double confidence =
                std::min(1.0, 0.7 + 0.3 * static_cast<double>(needed.size()) / static_cast<double>(tokens.size()));
            if (confidence > best.confidence) best = {&intent, confidence};
        }
    }
    return best;
}

GoalStep goal_agent_step(const GoalSpec &spec, SlotFrame frame, std::string_view utterance,
                         const ContextSnapshot &context) {
    if (is_identify_request(utterance)) {
        auto r = in_scope(frame, identify_intent, identify_confidence,
                          "I am the " + spec.agent_name + ". " + spec.description);
        return {std::move(r), std::move(frame)};
    }

    const auto match = match_intent(spec, utterance);
    const IntentSpec *current = frame.open() ? find_intent(spec, frame.intent) : nullptr;

    if (current && !match.intent) {
        if (frame.state == FrameState::confirming) {
            const auto tokens = tokenize(utterance);
            const bool yes = !tokens.empty() && yes_words.count(tokens.front());
            const bool no = !tokens.empty() && no_words.count(tokens.front());
            if (yes) return advance(*current, std::move(frame), slot_fill_confidence);
            if (no) {
                AgentResponse r;
                r.disposition = Disposition::in_scope;
                r.confidence = slot_fill_confidence;
                r.intent = current->name;
                r.reply_text = "Okay, I have cancelled that.";
                return {std::move(r), SlotFrame{}};
            }
        } else {
            auto next = std::find_if(frame.slots.begin(), frame.slots.end(), [](const auto &s) { return !s.value; });
            if (next != frame.slots.end()) {
                if (auto value = validate_slot(next->validator, utterance)) {
                    next->value = std::move(*value);
                    return advance(*current, std::move(frame), slot_fill_confidence);
                }
            }
        }
    }

    if (match.intent) return start(*match.intent, match.confidence, context);
    return out_of_scope();
}

void to_json(Json &j, const SlotFrame &f) {
    Json slots = Json::array();
    for (const auto &s : f.slots) {
        slots.push_back(Json{{"name", s.name},
                             {"prompt", s.prompt},
                             {"validator", s.validator},
                             {"value", s.value ? Json(*s.value) : Json(nullptr)}});
    }
    const char *state = f.state == FrameState::collecting   ? "collecting"
                        : f.state == FrameState::confirming ? "confirming"
                                                            : "fulfilled";
    j = Json{{"intent", f.intent}, {"slots", slots}, {"state", state}};
}

void from_json(const Json &j, SlotFrame &f) {
    f.intent = j.at("intent").get<std::string>();
    f.slots.clear();
    for (const auto &s : j.at("slots")) {
        SlotFrame::Slot slot{s.at("name").get<std::string>(), s.at("prompt").get<std::string>(),
                             s.at("validator").get<std::string>(), std::nullopt};
        if (!s.at("value").is_null()) slot.value = s.at("value").get<std::string>();
        f.slots.push_back(std::move(slot));
    }
    const auto state = j.at("state").get<std::string>();
    f.state = state == "collecting" ? FrameState::collecting
              : state == "confirming" ? FrameState::confirming
                                      : FrameState::fulfilled;
}

std::optional<SlotFrame> GoalAgent::frame(const std::string &session_id) const {
    std::lock_guard lock(mutex_);
    auto it = frames_.find(session_id);
    if (it == frames_.end()) return std::nullopt;
    return it->second;
}

void GoalAgent::set_frame(const std::string &session_id, SlotFrame frame) {
    std::lock_guard lock(mutex_);
    frames_[session_id] = std::move(frame);
}

Json GoalAgent::dialog(const Json &request) {
    const auto session = request.at("session").get<std::string>();
    const auto text = request.at("text").get<std::string>();
    ContextSnapshot context;
    if (request.contains("context")) context.entities = request.at("context").get<EntityMap>();

    SlotFrame frame;
    if (!request.value("restart", false)) frame = this->frame(session).value_or(SlotFrame{});
    auto step = goal_agent_step(spec_, std::move(frame), text, context);
    set_frame(session, step.frame);

    const auto &r = step.response;
    if (r.disposition != Disposition::in_scope) return Json{{"status", "not_handled"}};
    return Json{{"status", "handled"},
                {"score", r.confidence},
                {"intent", r.intent.value_or("")},
                {"slots", r.entities},
                {"speech", r.reply_text}};
}

}  // namespace lpar::agents
