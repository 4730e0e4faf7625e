#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "harness.hpp"
#include "lpar/agents/goal.hpp"
#include "lpar/agents/kit.hpp"
#include "lpar/agents/pod.hpp"
#include "lpar/agents/vendor_adapters.hpp"
#include "lpar/common/error.hpp"
#include "oracles.hpp"

using namespace lpar;
using namespace lpar::agents;

namespace {

AgentCall call_with(std::string text, DeliveryMode mode = DeliveryMode::selection) {
    AgentCall c;
    c.agent_id = "ag";
    c.query_id = "q-1";
    c.session_id = "s-1";
    c.utterance = std::move(text);
    c.channel_id = "cli";
    c.mode = mode;
    return c;
}

AgentResponse run(ScriptedAdapter::Script script, AdapterOptions opts = {}) {
    ScriptedAdapter adapter(std::move(script));
    return invoke_adapter(adapter, call_with("hi"), opts);
}

Verdict answer(double confidence) {
    Verdict v;
    v.disposition = Disposition::in_scope;
    v.confidence = confidence;
    v.intent = "x";
    v.reply_text = "ok";
    return v;
}

GoalSpec payments_spec() {
    GoalSpec spec;
    spec.agent_name = "Bill Payment Agent";
    spec.description = "I pay your bills.";
    IntentSpec pay;
    pay.name = "pay_bill";
    pay.phrases = {"pay bill", "bill payment"};
    pay.slots = {{"payee", "Who would you like to pay?", "text"},
                 {"amount", "How much?", "amount"},
                 {"account_number", "Which account?", "account_number"}};
    pay.confirm_prompt = "Pay {amount} to {payee} from {account_number}?";
    pay.fulfillment = "Paid {amount} to {payee}. Reference {reference}.";
    IntentSpec balance;
    balance.name = "check_balance";
    balance.phrases = {"balance"};
    balance.slots = {{"account_number", "Which account?", "account_number"}};
    balance.fulfillment = "Account {account_number} holds $10.";
    spec.intents = {pay, balance};
    return spec;
}

}  // namespace

TEST_CASE("adapter contract: answers, clamping and defaults") {
    auto r = run([](const AgentCall &, CallTimer &t) {
        t.sleep(25);
        return answer(0.7);
    }, {1500, 10});
    CHECK(r.disposition == Disposition::in_scope);
    CHECK(r.confidence == 0.7);
    CHECK(r.latency_ms == 35);  // processing cost plus the charged sleep
    CHECK(r.agent_id == "ag");
    CHECK(r.query_id == "q-1");
    CHECK(r.session_id == "s-1");

    CHECK(run([](const AgentCall &, CallTimer &) { return answer(1.7); }).confidence == 1.0);
    CHECK(run([](const AgentCall &, CallTimer &) { return answer(-0.3); }).confidence == 0.0);

    auto missing = run([](const AgentCall &, CallTimer &) {
        auto v = answer(0);
        v.confidence.reset();
        return v;
    });
    CHECK(missing.confidence == default_confidence);
}

TEST_CASE("adapter contract: failures become well-formed refusals") {
    auto slow = run([](const AgentCall &, CallTimer &t) {
        t.sleep(2000);
        return answer(0.9);
    }, {1500, 0});
    CHECK(slow.disposition == Disposition::out_of_scope);
    CHECK(slow.confidence == 0.0);
    CHECK(slow.latency_ms == 1500);

    auto thrown = run([](const AgentCall &, CallTimer &) -> Verdict { throw std::runtime_error("boom"); });
    CHECK(thrown.disposition == Disposition::out_of_scope);
    CHECK(thrown.confidence == 0.0);

    auto nan = run([](const AgentCall &, CallTimer &) { return answer(std::numeric_limits<double>::quiet_NaN()); });
    CHECK(nan.disposition == Disposition::out_of_scope);
    CHECK(nan.confidence == 0.0);

    auto refusal = run([](const AgentCall &, CallTimer &) {
        Verdict v;
        v.disposition = Disposition::out_of_scope;
        v.intent = "ignored";
        return v;
    });
    CHECK_FALSE(refusal.intent.has_value());
    CHECK(refusal.confidence == 0.0);
}

TEST_CASE("property: adapter output is always well formed") {
    harness::Gen gen(61);
    for (int i = 0; i < 500; ++i) {
        const int kind = gen.integer(0, 4);
        const double conf = gen.real(-2, 3);
        const auto cost = static_cast<std::int64_t>(gen.integer(0, 3000));
        const auto disp = static_cast<Disposition>(gen.integer(0, 2));
        auto r = run([&](const AgentCall &, CallTimer &t) -> Verdict {
            t.sleep(cost);
            if (kind == 0) throw std::runtime_error("x");
            Verdict v;
            v.disposition = disp;
            v.intent = "i";
            if (kind == 1) v.confidence = std::numeric_limits<double>::infinity();
            else if (kind != 2) v.confidence = conf;
            return v;
        });
        CHECK(r.confidence >= 0.0);
        CHECK(r.confidence <= 1.0);
        CHECK(r.latency_ms <= 1500);
        if (r.disposition == Disposition::out_of_scope) CHECK_FALSE(r.intent.has_value());
    }
}

TEST_CASE("slot validators") {
    CHECK(validate_slot("account_number", "it is 12345678 thanks") == "12345678");
    CHECK_FALSE(validate_slot("account_number", "12345").has_value());
    CHECK_FALSE(validate_slot("account_number", "1234567890123").has_value());
    CHECK(validate_slot("amount", "$120.50 please") == "120.50");
    CHECK(validate_slot("amount", "120") == "120");
    CHECK_FALSE(validate_slot("amount", "lots").has_value());
    CHECK(validate_slot("text", "  City Power ") == "City Power");
    CHECK_FALSE(validate_slot("text", "one two three four five").has_value());
    CHECK_FALSE(validate_slot("text", "!!").has_value());
    CHECK_FALSE(validate_slot("colour", "red").has_value());
    CHECK(known_validator("amount"));
    CHECK_FALSE(known_validator("colour"));
}

TEST_CASE("identify requests") {
    CHECK(is_identify_request("Who are you?"));
    CHECK(is_identify_request("hello, what is your name"));
    CHECK_FALSE(is_identify_request("who is paying"));
}

TEST_CASE("intent matching confidence") {
    const auto spec = payments_spec();
    auto m = match_intent(spec, "pay my bill");
    REQUIRE(m.intent != nullptr);
    CHECK(m.intent->name == "pay_bill");
    CHECK(m.confidence == doctest::Approx(0.7 + 0.3 * 2.0 / 3.0));
    CHECK(match_intent(spec, "balance").confidence == 1.0);
    CHECK(match_intent(spec, "hello").intent == nullptr);
}

TEST_CASE("goal agent walks slots, confirms and fulfils") {
    const auto spec = payments_spec();
    ContextSnapshot ctx;
    auto step = goal_agent_step(spec, {}, "I want to pay a bill", ctx);
    CHECK(step.response.reply_text == "Who would you like to pay?");
    CHECK(step.response.intent == "pay_bill");
    CHECK(step.frame.state == FrameState::collecting);

    step = goal_agent_step(spec, step.frame, "City Power", ctx);
    CHECK(step.response.reply_text == "How much?");
    CHECK(step.response.confidence == slot_fill_confidence);
    CHECK(step.response.entities.get("payee") == "City Power");

    step = goal_agent_step(spec, step.frame, "not a number", ctx);
    CHECK(step.response.disposition == Disposition::out_of_scope);
    CHECK(step.frame.idle());  // an unusable reply drops the frame

    // Context entities pre-fill slots.
    ctx.entities.set("account_number", "12345678");
    step = goal_agent_step(spec, {}, "bill payment", ctx);
    step = goal_agent_step(spec, step.frame, "City Power", ctx);
    step = goal_agent_step(spec, step.frame, "120", ctx);
    CHECK(step.response.reply_text == "Pay 120 to City Power from 12345678?");
    CHECK(step.frame.state == FrameState::confirming);

    // Identify requests leave the frame alone.
    auto who = goal_agent_step(spec, step.frame, "who are you", ctx);
    CHECK(who.response.intent == identify_intent);
    CHECK(who.response.confidence == identify_confidence);
    CHECK(who.response.reply_text == "I am the Bill Payment Agent. I pay your bills.");
    CHECK(who.frame == step.frame);

    auto done = goal_agent_step(spec, step.frame, "yes please", ctx);
    CHECK(done.frame.state == FrameState::fulfilled);
    CHECK(done.response.reply_text.rfind("Paid 120 to City Power. Reference ", 0) == 0);
    // The reference is a stable function of the values.
    CHECK(goal_agent_step(spec, step.frame, "yes", ctx).response.reply_text == done.response.reply_text);

    auto cancelled = goal_agent_step(spec, step.frame, "no", ctx);
    CHECK(cancelled.response.reply_text == "Okay, I have cancelled that.");
    CHECK(cancelled.frame.idle());
}

TEST_CASE("property: a serialized frame resumes exactly where it stopped") {
    harness::Gen gen(62);
    const auto spec = payments_spec();
    const std::vector<std::string> inputs = {"pay bill", "City Power", "120", "12345678", "yes", "no", "balance",
                                             "who are you", "gibberish words here now and more"};
    for (int trial = 0; trial < 200; ++trial) {
        SlotFrame frame;
        ContextSnapshot ctx;
        const int n = gen.integer(1, 6);
        for (int i = 0; i < n; ++i) frame = goal_agent_step(spec, frame, gen.pick(inputs), ctx).frame;
        const Json saved = frame;
        const auto restored = saved.get<SlotFrame>();
        CHECK(restored == frame);
        const auto next = gen.pick(inputs);
        CHECK(goal_agent_step(spec, restored, next, ctx).response == goal_agent_step(spec, frame, next, ctx).response);
    }
}

TEST_CASE("goal agent dialog endpoint keeps per-session frames") {
    GoalAgent agent(payments_spec());
    auto r = agent.dialog(Json{{"session", "s1"}, {"text", "pay bill"}, {"restart", true}});
    CHECK(r["status"] == "handled");
    CHECK(r["speech"] == "Who would you like to pay?");
    r = agent.dialog(Json{{"session", "s1"}, {"text", "Acme"}, {"restart", false}});
    CHECK(r["speech"] == "How much?");
    CHECK(r["slots"]["payee"] == "Acme");
    // A restart ignores the open frame; the other session is untouched.
    r = agent.dialog(Json{{"session", "s1"}, {"text", "Acme"}, {"restart", true}});
    CHECK(r["status"] == "not_handled");
    CHECK_FALSE(agent.frame("s2").has_value());
}

TEST_CASE("faq and search kit agents") {
    const std::vector<FaqPair> faqs = {FaqPair::make("What is the daily payment limit?", "Up to $10,000."),
                                       FaqPair::make("Can I cancel a payment?", "Until 11pm.")};
    auto r = faq_agent_answer(faqs, "what is the daily payment limit");
    CHECK(r.disposition == Disposition::in_scope);
    CHECK(r.reply_text == "Up to $10,000.");
    CHECK(r.confidence == doctest::Approx(oracle::cosine(oracle::embed("what is the daily payment limit"),
                                                          oracle::embed("What is the daily payment limit?"))));
    CHECK(faq_agent_answer(faqs, "zebra crossing").disposition == Disposition::out_of_scope);
    CHECK_THROWS_AS(faq_agent_answer({}, "x"), Error);

    const std::vector<SearchDocument> docs = {SearchDocument::make("Reset your password", "Choose forgot password."),
                                              SearchDocument::make("Lost card", "Freeze it in the app.")};
    auto s = search_agent_answer(docs, "reset my password");
    CHECK(s.disposition == Disposition::in_scope);
    CHECK(s.reply_text == "Reset your password: Choose forgot password.");
    const double sim = std::max(oracle::cosine(oracle::embed("reset my password"), oracle::embed("Reset your password")),
                                oracle::cosine(oracle::embed("reset my password"), oracle::embed("Choose forgot password.")));
    CHECK(s.confidence == doctest::Approx(0.5 * sim));
    CHECK(search_agent_answer(docs, "zebra").disposition == Disposition::out_of_scope);
    CHECK_THROWS_AS(SearchAgent("n", "d", {}), Error);

    FaqAgent agent("Payments FAQ Agent", "I answer payment questions.", faqs);
    const auto who = agent.ask("who are you");
    CHECK(who.found);
    CHECK(who.score == identify_confidence);
    CHECK(who.answer == "I am the Payments FAQ Agent. I answer payment questions.");
}

TEST_CASE("human connect only answers handed-over sessions") {
    HumanConnectAgent agent("Human Connect Agent", "I connect you.");
    CHECK(agent.dialog(Json{{"text", "hello"}, {"handed_over", false}})["status"] == "not_handled");
    const auto r = agent.dialog(Json{{"text", "hello"}, {"handed_over", true}});
    CHECK(r["status"] == "handled");
    CHECK(r["score"] == 1.0);
    CHECK(r["speech"].get<std::string>().find("colleague") != std::string::npos);
}

TEST_CASE("vendor adapters translate native replies") {
    Json seen;
    JsonDialogAdapter dialog([&](const Json &req) {
        seen = req;
        return Json{{"status", "escalate"}, {"speech", "over to you"}};
    });
    CallTimer t;
    auto c = call_with("help", DeliveryMode::direct);
    c.session_status = SessionStatus::handed_over;
    c.context.entities.set("k", "v");
    auto v = dialog.handle(c, t);
    CHECK(v.disposition == Disposition::handover_request);
    CHECK(seen["restart"] == false);
    CHECK(seen["handed_over"] == true);
    CHECK(seen["context"]["k"] == "v");

    JsonDialogAdapter bad([](const Json &) { return Json{{"status", "maybe"}}; });
    CHECK_THROWS(bad.handle(call_with("x"), t));
    JsonDialogAdapter not_object([](const Json &) { return Json::array(); });
    CHECK(invoke_adapter(not_object, call_with("x"), {}).disposition == Disposition::out_of_scope);

    ScoredAnswerAdapter scored([](std::string_view q) {
        return q == "known" ? ScoredAnswer{true, 0.8, "yes", "faq"} : ScoredAnswer{};
    });
    auto hit = scored.handle(call_with("known"), t);
    CHECK(hit.disposition == Disposition::in_scope);
    CHECK(hit.confidence == 0.8);
    CHECK(hit.intent == "faq");
    CHECK(scored.handle(call_with("other"), t).disposition == Disposition::out_of_scope);
}

TEST_CASE("node runtime answers on reply_to and handles multicast controls") {
    LogicalClock clock;
    bus::MessageBus bus(clock);
    const auto req = bus.create_topic(bus::TopicKind::private_request, "agent/n/req");
    const auto resp = bus.create_topic(bus::TopicKind::private_response, "agent/n/resp");
    auto sub = bus.subscribe(req, "n");
    AgentNode node(bus, "n", harness::scripted_handler({"n", Disposition::in_scope, 0.6, 30, {}, "hi"}));

    auto box = bus.mailbox("watcher");
    auto watch = bus.subscribe(resp, "watcher");

    // Subscribe to a multicast topic through the control channel.
    const auto mc = bus.create_topic(bus::TopicKind::multicast, "mc/q-9");
    bus::Envelope control;
    control.topic = req;
    control.payload = bus::Control{bus::ControlCommand::subscribe_multicast, mc.name};
    bus.publish(req, control);
    REQUIRE(bus.wait_for_subscribers(mc.name, 1, std::chrono::seconds(5)));

    bus::Envelope query;
    query.correlation_id = "q-9";
    query.session_id = "s-1";
    query.topic = req;
    query.reply_to = resp.name;
    query.payload = bus::Query{"hello", {}, "cli", SessionStatus::active};
    query.sent_at = 500;
    bus.publish(req, query);

    auto got = box->pop_for(std::chrono::seconds(5));
    REQUIRE(got.has_value());
    const auto &r = std::get<bus::Response>(got->envelope.payload).response;
    CHECK(r.agent_id == "n");
    CHECK(r.query_id == "q-9");
    CHECK(r.session_id == "s-1");
    CHECK(r.reply_text == "hi");
    CHECK(got->envelope.sent_at == 530);
    CHECK(got->envelope.correlation_id == "q-9");

    control.payload = bus::Control{bus::ControlCommand::unsubscribe_multicast, mc.name};
    bus.publish(req, control);
    for (int i = 0; i < 500 && bus.subscriber_count(mc.name) > 0; ++i) std::this_thread::sleep_for(std::chrono::milliseconds(2));
    CHECK(bus.subscriber_count(mc.name) == 0);
    node.stop();
}

TEST_CASE("pod coordinator relays the member winner and keeps an inner binding") {
    gateway::Platform p;
    p.load_app(harness::bare_app("app"));
    auto pod = harness::descriptor("pod", registry::AgentClass::not_applicable);
    pod.node_type = registry::NodeType::pod;
    pod.name = "Pod";
    p.add_pod("app", pod, PodSettings{});
    harness::add_scripted(p, "app", {"fast", Disposition::in_scope, 0.6, 10, {"pay bill"}, ""}, "pod");
    harness::add_scripted(p, "app", {"sure", Disposition::in_scope, 0.9, 40, {"bill help"}, ""}, "pod");
    auto coord = *p.pod("pod");

    auto c = call_with("pay my bill");
    c.agent_id = "pod";
    c.sent_at = 100;
    const auto r = coord->handle(c);
    CHECK(r.served_by == "sure");
    CHECK(r.confidence == 0.9);
    CHECK(r.latency_ms == 40);
    CHECK(coord->inner_binding("s-1") == "sure");

    // Direct delivery continues with the bound member.
    const auto d = coord->handle(call_with("next", DeliveryMode::direct));
    CHECK(d.served_by == "sure");
    coord->clear_bindings_for("sure");
    CHECK_FALSE(coord->inner_binding("s-1").has_value());
}
