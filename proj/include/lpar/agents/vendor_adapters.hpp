#pragma once

#include <functional>
#include <string_view>

#include "lpar/agents/adapter.hpp"
#include "lpar/agents/kit.hpp"
#include "lpar/common/json.hpp"

namespace lpar::agents {

// Dialog-platform style vendor: JSON in, JSON out.
//   request  {session, text, channel, restart, handed_over, context:{entities}}
//   reply    {status: handled|not_handled|escalate, score?, intent?, slots?, speech?}
// Any other status, or a reply of the wrong shape, is treated as malformed.
class JsonDialogAdapter : public Adapter {
public:
    using Endpoint = std::function<Json(const Json &request)>;

    explicit JsonDialogAdapter(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}

    Verdict handle(const AgentCall &call, CallTimer &timer) override;

private:
    Endpoint endpoint_;
};

// Retrieval style vendor: a question string in, a ScoredAnswer out.
class ScoredAnswerAdapter : public Adapter {
public:
    using Endpoint = std::function<ScoredAnswer(std::string_view question)>;

    explicit ScoredAnswerAdapter(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}

    Verdict handle(const AgentCall &call, CallTimer &timer) override;

private:
    Endpoint endpoint_;
};

// Test double that hands the call straight to a function.
class ScriptedAdapter : public Adapter {
public:
    using Script = std::function<Verdict(const AgentCall &call, CallTimer &timer)>;

    explicit ScriptedAdapter(Script script) : script_(std::move(script)) {}

    Verdict handle(const AgentCall &call, CallTimer &timer) override { return script_(call, timer); }

private:
    Script script_;
};

}  // namespace lpar::agents
