#include "lpar/agents/adapter.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

namespace lpar::agents {

namespace {

AgentResponse refusal(const AgentCall &call, double latency) {
    AgentResponse r;
    r.agent_id = call.agent_id;
    r.query_id = call.query_id;
    r.session_id = call.session_id;
    r.disposition = Disposition::out_of_scope;
    r.confidence = 0.0;
    r.latency_ms = latency;
    return r;
}

}  // namespace

AgentResponse invoke_adapter(Adapter &adapter, const AgentCall &call, const AdapterOptions &options) {
    CallTimer timer;
    timer.sleep(options.processing_ms);

    Verdict verdict;
    try {
        verdict = adapter.handle(call, timer);
    } catch (const std::exception &) {
        return refusal(call, static_cast<double>(std::min(timer.elapsed(), options.budget_ms)));
    }

    if (timer.elapsed() > options.budget_ms) return refusal(call, static_cast<double>(options.budget_ms));

    double confidence = verdict.confidence.value_or(default_confidence);
    if (!std::isfinite(confidence)) return refusal(call, static_cast<double>(timer.elapsed()));
    confidence = std::clamp(confidence, 0.0, 1.0);

    AgentResponse r;
    r.agent_id = call.agent_id;
    r.query_id = call.query_id;
    r.session_id = call.session_id;
    r.disposition = verdict.disposition;
    r.latency_ms = static_cast<double>(timer.elapsed());
    if (verdict.disposition == Disposition::out_of_scope) {
        r.confidence = verdict.confidence ? confidence : 0.0;
        r.reply_text = std::move(verdict.reply_text);
        return r;
    }
    r.confidence = confidence;
    r.intent = std::move(verdict.intent);
    r.entities = std::move(verdict.entities);
    r.reply_text = std::move(verdict.reply_text);
    return r;
}

}  // namespace lpar::agents
