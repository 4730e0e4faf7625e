#include <doctest.h>

#include <fstream>

#include "harness.hpp"
#include "lpar/common/error.hpp"
#include "lpar/stores/stores.hpp"
#include "oracles.hpp"

using namespace lpar;
using namespace lpar::stores;

namespace {

template <class F>
ErrorCode code_of(F &&f) {
    try {
        f();
    } catch (const Error &e) {
        return e.code();
    }
    FAIL("expected an lpar::Error");
    return ErrorCode::invalid_argument;
}

struct Fixture {
    LogicalClock clock{1000};
    bus::MessageBus bus{clock};
    registry::Registry reg{bus};
    Stores stores{reg, clock};

    explicit Fixture(registry::DataClassification cls = registry::DataClassification::internal) {
        auto a = harness::app("shop");
        a.data_classification = cls;
        reg.register_app(a);
        for (const char *id : {"a", "b", "human"}) reg.register_agent("shop", harness::descriptor(id), {"x"});
    }
};

}  // namespace

TEST_CASE("open_session assigns ids and validates the channel") {
    Fixture f;
    const auto s1 = f.stores.sessions.open_session("shop", "u-1", "cli");
    const auto s2 = f.stores.sessions.open_session("shop", "u-1", "web");
    CHECK(s1.session_id == "s-1");
    CHECK(s2.session_id == "s-2");
    CHECK(s1.status == SessionStatus::active);
    CHECK(s1.created_at == 1000);
    CHECK(f.stores.sessions.live_session_for("shop", "u-1") == "s-2");
    CHECK_FALSE(f.stores.sessions.live_session_for("shop", "u-2").has_value());
    CHECK(code_of([&] { f.stores.sessions.open_session("shop", "u-1", "voice"); }) == ErrorCode::unsupported_channel);
    CHECK(code_of([&] { f.stores.sessions.open_session("nope", "u-1", "cli"); }) == ErrorCode::unknown_app);
    CHECK(code_of([&] { (void)f.stores.sessions.get("s-99"); }) == ErrorCode::unknown_session);
}

TEST_CASE("property: session status follows its state machine") {
    harness::Gen gen(31);
    for (int trial = 0; trial < 50; ++trial) {
        Fixture f;
        const auto sid = f.stores.sessions.open_session("shop", "u", "cli").session_id;
        SessionStatus model = SessionStatus::active;
        std::optional<std::string> bound;
        for (int step = 0; step < 12; ++step) {
            const int op = gen.integer(0, 3);
            if (op == 0) {
                const bool ok = model == SessionStatus::active;
                if (ok) {
                    f.stores.sessions.hand_over(sid, "human");
                    model = SessionStatus::handed_over;
                    bound = "human";
                } else {
                    CHECK(code_of([&] { f.stores.sessions.hand_over(sid, "human"); }) == ErrorCode::session_not_active);
                }
            } else if (op == 1) {
                if (model != SessionStatus::closed) {
                    f.stores.sessions.close(sid);
                    model = SessionStatus::closed;
                } else {
                    CHECK(code_of([&] { f.stores.sessions.close(sid); }) == ErrorCode::session_not_active);
                }
            } else if (op == 2) {
                const auto agent = gen.chance(0.5) ? "a" : "b";
                if (model == SessionStatus::active) {
                    f.stores.sessions.bind_serving_agent(sid, agent);
                    bound = agent;
                } else {
                    CHECK(code_of([&] { f.stores.sessions.bind_serving_agent(sid, agent); }) == ErrorCode::session_not_active);
                }
            } else {
                if (model == SessionStatus::active) {
                    f.stores.sessions.unbind(sid);
                    bound.reset();
                } else {
                    CHECK(code_of([&] { f.stores.sessions.unbind(sid); }) == ErrorCode::session_not_active);
                }
            }
            const auto rec = f.stores.sessions.get(sid);
            CHECK(rec.status == model);
            CHECK(rec.serving_agent_id == bound);
        }
    }
}

TEST_CASE("bind rejects unknown agents; unbind_agent clears live bindings") {
    Fixture f;
    const auto s1 = f.stores.sessions.open_session("shop", "u", "cli").session_id;
    const auto s2 = f.stores.sessions.open_session("shop", "v", "cli").session_id;
    CHECK(code_of([&] { f.stores.sessions.bind_serving_agent(s1, "ghost"); }) == ErrorCode::unknown_agent);
    f.stores.sessions.bind_serving_agent(s1, "a");
    f.stores.sessions.bind_serving_agent(s2, "b");
    CHECK(f.stores.sessions.unbind_agent("a") == std::vector<std::string>{s1});
    CHECK_FALSE(f.stores.sessions.get(s1).serving_agent_id.has_value());
    CHECK(f.stores.sessions.get(s2).serving_agent_id == "b");
}

TEST_CASE("merge_context appends intents, overwrites entities and enforces caps") {
    Fixture f;
    const auto sid = f.stores.sessions.open_session("shop", "u", "cli").session_id;
    auto ctx = f.stores.sessions.merge_context(sid, {"greet"}, EntityMap{{"city", "Leeds"}});
    ctx = f.stores.sessions.merge_context(sid, {"pay"}, EntityMap{{"city", "York"}, {"amount", "5"}});
    CHECK(ctx.intents == std::vector<std::string>{"greet", "pay"});
    CHECK(ctx.entities.get("city") == "York");
    CHECK(ctx.entities.size() == 2);

    for (int i = 0; i < 120; ++i) {
        f.stores.sessions.merge_context(sid, {"i" + std::to_string(i)}, EntityMap{{"k" + std::to_string(i), "v"}});
    }
    const auto rec = f.stores.sessions.get(sid);
    CHECK(rec.context.intents.size() == ContextSnapshot::max_intents);
    CHECK(rec.context.intents.back() == "i119");
    CHECK(rec.context.intents.front() == "i70");
    CHECK(rec.context.entities.size() == ContextSnapshot::max_entities);
    CHECK(rec.context.entities.contains("k119"));
    CHECK_FALSE(rec.context.entities.contains("k19"));
    CHECK(rec.context.entities.contains("k20"));
}

TEST_CASE("sentiment is clamped and oos counts up and resets") {
    Fixture f;
    const auto sid = f.stores.sessions.open_session("shop", "u", "cli").session_id;
    f.stores.sessions.set_sentiment(sid, -3.0);
    CHECK(f.stores.sessions.get(sid).last_sentiment == -1.0);
    CHECK(f.stores.sessions.increment_oos(sid) == 1);
    CHECK(f.stores.sessions.increment_oos(sid) == 2);
    f.stores.sessions.reset_oos(sid);
    CHECK(f.stores.sessions.get(sid).consecutive_oos == 0);
}

TEST_CASE("rating band examples") {
    CHECK(rating_band(5.0, 2) == Rating::Beginner);
    CHECK(rating_band(1.9, 3) == Rating::Beginner);
    CHECK(rating_band(2.0, 3) == Rating::Intermediate);
    CHECK(rating_band(3.0, 3) == Rating::Professional);
    CHECK(rating_band(3.99, 10) == Rating::Professional);
    CHECK(rating_band(4.0, 3) == Rating::Expert);
}

TEST_CASE("property: feedback bands match the oracle and registry") {
    harness::Gen gen(32);
    for (int trial = 0; trial < 100; ++trial) {
        Fixture f;
        std::vector<int> scores;
        const int n = gen.integer(1, 12);
        for (int i = 0; i < n; ++i) {
            const int s = gen.integer(1, 5);
            scores.push_back(s);
            const auto band = f.stores.feedback.record_feedback({"s-1", "a", s, ""});
            CHECK(band == oracle::band(scores));
            CHECK(f.reg.rating_of("a") == oracle::band(scores));
        }
        const auto state = f.stores.feedback.rating_state("a");
        REQUIRE(state.has_value());
        CHECK(state->sample_count == scores.size());
    }
}

TEST_CASE("property: a higher score never lowers the band") {
    harness::Gen gen(33);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<int> scores;
        const int n = gen.integer(0, 10);
        for (int i = 0; i < n; ++i) scores.push_back(gen.integer(1, 5));
        const int lo = gen.integer(1, 5);
        const int hi = gen.integer(lo, 5);
        auto with_lo = scores;
        with_lo.push_back(lo);
        auto with_hi = scores;
        with_hi.push_back(hi);
        double sum_lo = 0, sum_hi = 0;
        for (int s : with_lo) sum_lo += s;
        for (int s : with_hi) sum_hi += s;
        const auto count = with_lo.size();
        CHECK(oracle::rating_rank(rating_band(sum_lo / static_cast<double>(count), count)) <=
              oracle::rating_rank(rating_band(sum_hi / static_cast<double>(count), count)));
    }
}

TEST_CASE("feedback validation") {
    Fixture f;
    CHECK(code_of([&] { f.stores.feedback.record_feedback({"s", "a", 0, ""}); }) == ErrorCode::invalid_score);
    CHECK(code_of([&] { f.stores.feedback.record_feedback({"s", "a", 6, ""}); }) == ErrorCode::invalid_score);
    CHECK(code_of([&] { f.stores.feedback.record_feedback({"s", "ghost", 3, ""}); }) == ErrorCode::unknown_agent);
    CHECK(f.stores.feedback.records().empty());
}

TEST_CASE("query cache redacts utterances for sensitive apps only") {
    for (auto cls : {registry::DataClassification::sensitive, registry::DataClassification::internal}) {
        Fixture f(cls);
        const auto sid = f.stores.sessions.open_session("shop", "u", "cli").session_id;
        QueryCacheEntry e;
        e.query_id = "shop/q-1";
        e.session_id = sid;
        e.utterance_stored = "mail me at jo@example.com";
        f.stores.queries.log_query(e);
        const auto got = f.stores.queries.get_queries(sid);
        REQUIRE(got.size() == 1);
        if (cls == registry::DataClassification::sensitive) {
            CHECK(got[0].utterance_stored == "mail me at [REDACTED:email]");
        } else {
            CHECK(got[0].utterance_stored == "mail me at jo@example.com");
        }
    }
}

TEST_CASE("user store resolves and links identities") {
    UserStore users;
    const auto u = users.resolve_user("cli", "alice");
    CHECK(u.user_id == "u-1");
    CHECK(users.resolve_user("cli", "alice").user_id == "u-1");
    CHECK(users.resolve_user("web", "alice").user_id == "u-2");
    users.link_identity("u-1", "web", "alice-web");
    CHECK(users.resolve_user("web", "alice-web").user_id == "u-1");
    const auto p = users.profile("u-1");
    REQUIRE(p.has_value());
    CHECK(p->channel_identities.at("web") == "alice-web");
}

TEST_CASE("routing rules hide rules for vanished agents") {
    Fixture f;
    f.stores.routing.set_rule({"u-1", "a", "vip"});
    CHECK(f.stores.routing.routing_rule_for("u-1")->preferred_agent_id == "a");
    f.reg.deregister_agent("a");
    CHECK_FALSE(f.stores.routing.routing_rule_for("u-1").has_value());
    CHECK_FALSE(f.stores.routing.routing_rule_for("u-2").has_value());
}

TEST_CASE("snapshot then load reproduces every store") {
    const auto dir = harness::scratch_dir("stores");
    Fixture f(registry::DataClassification::sensitive);
    const auto s1 = f.stores.sessions.open_session("shop", "u-1", "cli").session_id;
    f.stores.sessions.bind_serving_agent(s1, "a");
    f.stores.sessions.merge_context(s1, {"pay"}, EntityMap{{"amount", "5"}});
    QueryCacheEntry e;
    e.query_id = "shop/q-1";
    e.session_id = s1;
    e.utterance_stored = "card 4111 1111 1111 1111";
    e.embedding = embed::embed_text("card");
    e.strategy = Strategy::search_and_multicast;
    AgentResponse r;
    r.agent_id = "a";
    r.query_id = "shop/q-1";
    r.confidence = 0.5;
    e.gathered = {r};
    e.selected_agent_id = "a";
    f.stores.queries.log_query(e);
    for (int s : {5, 4, 5}) f.stores.feedback.record_feedback({s1, "a", s, "ok"});
    f.stores.users.resolve_user("cli", "alice");
    f.stores.routing.set_rule({"u-1", "b", "pref"});
    f.stores.snapshot(dir);

    // A second snapshot appends only what changed.
    f.stores.sessions.close(s1);
    f.stores.snapshot(dir);

    Fixture g(registry::DataClassification::sensitive);
    g.stores.load(dir);
    CHECK(g.stores.sessions.all() == f.stores.sessions.all());
    CHECK(g.stores.sessions.get(s1).status == SessionStatus::closed);
    CHECK(g.stores.queries.all() == f.stores.queries.all());
    CHECK(g.stores.queries.all().at(0).utterance_stored == "card [REDACTED:card]");
    CHECK(g.stores.feedback.ratings() == f.stores.feedback.ratings());
    CHECK(g.stores.feedback.records() == f.stores.feedback.records());
    CHECK(g.reg.rating_of("a") == Rating::Expert);
    CHECK(g.stores.users.all() == f.stores.users.all());
    CHECK(g.stores.routing.all() == f.stores.routing.all());
    // Ids keep counting after a restore.
    CHECK(g.stores.sessions.open_session("shop", "u-9", "cli").session_id == "s-2");
    CHECK(g.stores.users.resolve_user("cli", "bob").user_id == "u-2");
    std::filesystem::remove_all(dir);
}

TEST_CASE("load reports malformed lines with their position") {
    const auto dir = harness::scratch_dir("badload");
    {
        std::ofstream out(dir / "sessions.jsonl");
        out << "{not json}\n";
    }
    Fixture f;
    CHECK(code_of([&] { f.stores.load(dir); }) == ErrorCode::parse_error);
    std::filesystem::remove_all(dir);
}
