#include <doctest.h>

#include <chrono>

#include "harness.hpp"
#include "lpar/common/error.hpp"
#include "lpar/select/policy.hpp"
#include "lpar/select/selector.hpp"
#include "oracles.hpp"

using namespace lpar;
using namespace lpar::select;

namespace {

AgentResponse resp(std::string id, double confidence, double latency,
                   Disposition d = Disposition::in_scope) {
    AgentResponse r;
    r.agent_id = std::move(id);
    r.query_id = "q";
    r.disposition = d;
    r.confidence = confidence;
    r.latency_ms = latency;
    return r;
}

std::optional<std::string> pick(PolicyId p, const std::vector<AgentResponse> &cands, const RatingMap &ratings = {}) {
    auto w = apply_policy(p, cands, ratings);
    if (!w) return std::nullopt;
    return w->agent_id;
}

SelectionRequest request(const std::string &app, const std::string &text, Strategy s, std::int64_t window = 2000) {
    static int counter = 0;
    SelectionRequest r;
    r.query_id = app + "/q-" + std::to_string(++counter);
    r.session_id = "s-1";
    r.utterance = text;
    r.embedding = embed::embed_text(text);
    r.scope = registry::Scope::app(app);
    r.strategy = s;
    r.gather_window_ms = window;
    r.k = 3;
    r.similarity_floor = 0.1;
    return r;
}

}  // namespace

TEST_CASE("rating weights") {
    CHECK(rating_weight(Rating::Beginner) == 0.25);
    CHECK(rating_weight(Rating::Intermediate) == 0.5);
    CHECK(rating_weight(Rating::Professional) == 0.75);
    CHECK(rating_weight(Rating::Expert) == 1.0);
}

TEST_CASE("policy examples") {
    const std::vector<AgentResponse> c = {resp("a", 0.9, 300), resp("b", 0.6, 50), resp("c", 0.4, 10)};
    const RatingMap r{{"a", Rating::Beginner}, {"b", Rating::Expert}, {"c", Rating::Expert}};
    CHECK(pick(PolicyId::highest_confidence, c, r) == "a");
    // 0.9 * 0.25 = 0.225 against 0.6 * 1.0 = 0.6
    CHECK(pick(PolicyId::rating_weighted, c, r) == "b");
    // c is fastest but below 0.5 confidence.
    CHECK(pick(PolicyId::fastest_eligible, c, r) == "b");

    // Nobody eligible: falls back to highest confidence.
    const std::vector<AgentResponse> low = {resp("x", 0.3, 5), resp("y", 0.4, 500)};
    CHECK(pick(PolicyId::fastest_eligible, low) == "y");

    // Ties: rating, then latency, then id.
    const std::vector<AgentResponse> tied = {resp("m", 0.7, 100), resp("k", 0.7, 100), resp("z", 0.7, 20)};
    CHECK(pick(PolicyId::highest_confidence, tied) == "z");
    CHECK(pick(PolicyId::highest_confidence, tied, {{"m", Rating::Professional}}) == "m");
    const std::vector<AgentResponse> same = {resp("m", 0.7, 100), resp("k", 0.7, 100)};
    CHECK(pick(PolicyId::highest_confidence, same) == "k");

    // Out-of-scope answers never win; an empty field yields nothing.
    const std::vector<AgentResponse> oos = {resp("o", 1.0, 1, Disposition::out_of_scope),
                                            resp("h", 1.0, 1, Disposition::handover_request)};
    CHECK_FALSE(pick(PolicyId::highest_confidence, oos).has_value());
    CHECK_FALSE(pick(PolicyId::rating_weighted, {}).has_value());
}

TEST_CASE("relayed answers are judged by the member that produced them") {
    auto relayed = resp("pod", 0.7, 100);
    relayed.served_by = "zmember";
    const std::vector<AgentResponse> c = {relayed, resp("solo", 0.7, 100)};
    CHECK(pick(PolicyId::highest_confidence, c, {{"zmember", Rating::Expert}}) == "pod");
    CHECK(pick(PolicyId::highest_confidence, c, {{"pod", Rating::Expert}}) == "solo");
}

TEST_CASE("property: every policy agrees with the brute-force oracle") {
    harness::Gen gen(51);
    const std::vector<double> confidences = {0.0, 0.2, 0.4, 0.5, 0.6, 0.8, 1.0};
    const std::vector<double> latencies = {5, 10, 10, 40, 100};
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<AgentResponse> cands;
        std::vector<oracle::Candidate> in_scope;
        RatingMap ratings;
        const int n = gen.integer(0, 8);
        for (int i = 0; i < n; ++i) {
            const auto id = "a" + std::to_string(gen.integer(0, 99)) + "-" + std::to_string(i);
            // Coarse values make ties common.
            const double conf = gen.chance(0.5) ? gen.pick(confidences) : gen.real(0, 1);
            const double lat = gen.pick(latencies);
            const auto disp = gen.chance(0.8) ? Disposition::in_scope : Disposition::out_of_scope;
            const auto rating = gen.rating();
            if (gen.chance(0.9)) ratings[id] = rating;
            cands.push_back(resp(id, conf, lat, disp));
            if (disp == Disposition::in_scope) {
                in_scope.push_back({id, conf, lat, ratings.count(id) ? rating : Rating::Beginner});
            }
        }
        const auto policy = gen.policy();
        CAPTURE(trial);
        CHECK(pick(policy, cands, ratings) == oracle::winner(policy, in_scope));
    }
}

TEST_CASE("selector rounds over scripted agents") {
    gateway::Platform p;
    p.load_app(harness::bare_app("app"));
    harness::add_scripted(p, "app", {"pay", Disposition::in_scope, 0.9, 30, {"pay my bill", "bill payment"}, ""});
    harness::add_scripted(p, "app", {"atm", Disposition::in_scope, 0.6, 10, {"find an atm", "nearest cash machine"}, ""});
    harness::add_scripted(p, "app", {"faq", Disposition::out_of_scope, 0.0, 5, {"opening hours"}, ""});
    harness::add_scripted(p, "app", {"slow", Disposition::in_scope, 1.0, 2500, {"pay my bill quickly"}, ""});
    auto &sel = p.selector();

    SUBCASE("broadcast reaches everyone; late answers are dropped") {
        const auto out = sel.select(request("app", "pay my bill", Strategy::broadcast_only));
        CHECK(out.strategy_executed == Strategy::broadcast_only);
        REQUIRE(out.winner.has_value());
        CHECK(out.winner->agent_id == "pay");
        // slow answered at 2500 ms > 2000 ms window.
        CHECK(out.gathered.size() == 3);
        for (const auto &r : out.gathered) CHECK(r.agent_id != "slow");
        CHECK(out.gathered.front().agent_id == "faq");  // ordered by latency
        CHECK(out.elapsed_ms == 2000);                  // a late answer means the window ran out
    }

    SUBCASE("a wide window lets the slow agent win") {
        const auto out = sel.select(request("app", "pay my bill", Strategy::broadcast_only, 5000));
        REQUIRE(out.winner.has_value());
        CHECK(out.winner->agent_id == "slow");
        CHECK(out.elapsed_ms == 2500);
    }

    SUBCASE("multicast asks only the ranked candidates") {
        p.bus().set_recording(true);
        auto req = request("app", "nearest atm", Strategy::search_and_multicast);
        req.k = 1;
        const auto out = sel.select(req);
        CHECK(out.strategy_executed == Strategy::search_and_multicast);
        CHECK_FALSE(out.fallback_used);
        REQUIRE(out.candidates.size() == 1);
        CHECK(out.candidates[0].agent_id == "atm");
        REQUIRE(out.winner.has_value());
        CHECK(out.winner->agent_id == "atm");
        for (const auto &rec : p.bus().delivery_log()) {
            if (rec.payload_kind == "query" && rec.correlation_id == req.query_id && rec.participant.rfind("gather/", 0) != 0) {
                CHECK(rec.participant == "atm");
            }
        }
        CHECK_FALSE(p.bus().has_topic(bus::multicast_topic_name(req.query_id)));
    }

    SUBCASE("no candidate above the floor falls back to broadcast") {
        auto req = request("app", "zzz qqq", Strategy::search_and_multicast);
        req.similarity_floor = 0.99;
        const auto out = sel.select(req);
        CHECK(out.fallback_used);
        CHECK(out.strategy_executed == Strategy::broadcast_only);
        CHECK(out.gathered.size() == 3);
    }

    SUBCASE("direct asks one agent") {
        const auto got = sel.ask_direct("atm", request("app", "camden", Strategy::direct_to_bound));
        REQUIRE(got.response.has_value());
        CHECK(got.response->agent_id == "atm");
        CHECK(got.elapsed_ms == 10);
        const auto late = sel.ask_direct("slow", request("app", "x", Strategy::direct_to_bound));
        CHECK_FALSE(late.response.has_value());
        CHECK(late.elapsed_ms == 2000);
    }

    SUBCASE("latency feeds the registry average") {
        (void)sel.select(request("app", "pay my bill", Strategy::broadcast_only));
        CHECK(p.registry().descriptor("pay").avg_response_time_ms == doctest::Approx(6.0));
    }

    SUBCASE("argument checks") {
        CHECK_THROWS_AS(sel.select(request("app", "x", Strategy::direct_to_bound)), Error);
        CHECK_THROWS_AS(sel.select(request("app", "x", Strategy::broadcast_only, 0)), Error);
        auto bad = request("app", "x", Strategy::search_and_multicast);
        bad.scope = registry::Scope::pod("app", "nope");
        CHECK_THROWS_AS(sel.select(bad), Error);
    }
}

TEST_CASE("silent agents are bounded by the backstop") {
    gateway::PlatformOptions opts;
    opts.selector.backstop = std::chrono::milliseconds(200);
    gateway::Platform p(opts);
    p.load_app(harness::bare_app("app"));
    struct Silent : agents::NodeHandler {
        AgentResponse handle(const agents::AgentCall &) override {
            std::this_thread::sleep_for(std::chrono::milliseconds(600));
            return {};
        }
    };
    p.add_node("app", harness::descriptor("mute"), {"hello"}, std::make_shared<Silent>());
    harness::add_scripted(p, "app", {"ok", Disposition::in_scope, 0.5, 10, {"hello"}, ""});
    const auto start = std::chrono::steady_clock::now();
    const auto out = p.selector().select(request("app", "hello", Strategy::broadcast_only));
    CHECK(std::chrono::steady_clock::now() - start < std::chrono::milliseconds(550));
    REQUIRE(out.winner.has_value());
    CHECK(out.winner->agent_id == "ok");
}

TEST_CASE("concurrent multicast rounds stay isolated") {
    gateway::Platform p;
    p.load_app(harness::bare_app("app"));
    for (int i = 0; i < 5; ++i) {
        harness::add_scripted(p, "app", {"ag" + std::to_string(i), Disposition::in_scope, 0.1 * (i + 1), 10,
                                         {"topic" + std::to_string(i) + " words here"}, ""});
    }
    p.bus().set_recording(true);
    std::vector<std::thread> threads;
    std::vector<SelectionOutcome> outs(8);
    std::vector<SelectionRequest> reqs;
    for (int t = 0; t < 8; ++t) {
        auto r = request("app", "topic" + std::to_string(t % 5) + " words", Strategy::search_and_multicast);
        r.k = 2;
        r.similarity_floor = -1.0;
        reqs.push_back(r);
    }
    for (int t = 0; t < 8; ++t) threads.emplace_back([&, t] { outs[t] = p.selector().select(reqs[t]); });
    for (auto &th : threads) th.join();

    const auto log = p.bus().delivery_log();
    for (int t = 0; t < 8; ++t) {
        std::set<std::string> allowed;
        for (const auto &c : outs[t].candidates) allowed.insert(c.agent_id);
        CHECK(allowed.size() == 2);
        for (const auto &rec : log) {
            if (rec.payload_kind == "query" && rec.correlation_id == reqs[t].query_id &&
                rec.participant.rfind("gather/", 0) != 0) {
                CHECK(allowed.count(rec.participant));
            }
        }
        for (const auto &g : outs[t].gathered) {
            CHECK(g.query_id == reqs[t].query_id);
            CHECK(allowed.count(g.agent_id));
        }
    }
}
