#include "lpar/agents/vendor_adapters.hpp"

#include <stdexcept>

namespace lpar::agents {

Verdict JsonDialogAdapter::handle(const AgentCall &call, CallTimer &) {
    Json request{{"session", call.session_id},
                 {"text", call.utterance},
                 {"channel", call.channel_id},
                 {"restart", call.mode == DeliveryMode::selection},
                 {"handed_over", call.session_status == SessionStatus::handed_over},
                 {"context", call.context.entities}};
    const Json reply = endpoint_(request);
    if (!reply.is_object()) throw std::runtime_error("dialog reply is not an object");

    const auto status = reply.at("status").get<std::string>();
    Verdict v;
    if (status == "handled") {
        v.disposition = Disposition::in_scope;
    } else if (status == "not_handled") {
        v.disposition = Disposition::out_of_scope;
    } else if (status == "escalate") {
        v.disposition = Disposition::handover_request;
    } else {
        throw std::runtime_error("unknown dialog status: " + status);
    }

    if (reply.contains("score") && !reply.at("score").is_null()) v.confidence = reply.at("score").get<double>();
    if (reply.contains("intent") && reply.at("intent").is_string() && !reply.at("intent").get<std::string>().empty()) {
        v.intent = reply.at("intent").get<std::string>();
    }
    if (reply.contains("slots")) v.entities = reply.at("slots").get<EntityMap>();
    v.reply_text = reply.value("speech", std::string{});
    return v;
}

Verdict ScoredAnswerAdapter::handle(const AgentCall &call, CallTimer &) {
    const auto answer = endpoint_(call.utterance);
    Verdict v;
    if (!answer.found) return v;
    v.disposition = Disposition::in_scope;
    v.confidence = answer.score;
    if (!answer.topic.empty()) v.intent = answer.topic;
    v.reply_text = answer.answer;
    return v;
}

}  // namespace lpar::agents
