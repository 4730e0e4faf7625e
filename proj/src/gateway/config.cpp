#include "lpar/gateway/config.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "lpar/agents/goal.hpp"
#include "lpar/agents/kit.hpp"
#include "lpar/agents/vendor_adapters.hpp"
#include "lpar/common/error.hpp"

namespace lpar::gateway {

using registry::AgentClass;
using registry::AgentDescriptor;
using registry::NodeType;

std::string_view to_string(AgentKind kind) noexcept {
    switch (kind) {
    case AgentKind::goal: return "goal";
    case AgentKind::faq: return "faq";
    case AgentKind::search: return "search";
    case AgentKind::human_connect: return "human_connect";
    case AgentKind::scripted: return "scripted";
    }
    return "scripted";
}

namespace {

[[noreturn]] void invalid(const std::string &path, const std::string &message) {
    throw Error(ErrorCode::validation_error, path + ": " + message);
}

const Json &require(const Json &obj, const char *key, const std::string &path) {
    if (!obj.is_object()) invalid(path, "expected an object");
    if (!obj.contains(key)) invalid(path + "." + key, "missing");
    return obj.at(key);
}

template <typename T>
T as(const Json &j, const std::string &path) {
    try {
        return j.get<T>();
    } catch (const nlohmann::json::exception &e) {
        invalid(path, std::string("wrong type (") + j.type_name() + ")");
    }
}

template <typename T>
T get(const Json &obj, const char *key, const std::string &path) {
    return as<T>(require(obj, key, path), path + "." + key);
}

template <typename T>
T get_or(const Json &obj, const char *key, const std::string &path, T fallback) {
    if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
    return as<T>(obj.at(key), path + "." + key);
}

template <typename E>
E parse_enum(const Json &j, const std::string &path, std::initializer_list<E> values) {
    const auto s = as<std::string>(j, path);
    for (E v : values) {
        if (to_string(v) == s) return v;
    }
    invalid(path, "unknown value '" + s + "'");
}

template <typename E>
E enum_or(const Json &obj, const char *key, const std::string &path, E fallback, std::initializer_list<E> values) {
    if (!obj.contains(key)) return fallback;
    return parse_enum(obj.at(key), path + "." + key, values);
}

const std::initializer_list<AgentClass> all_classes = {AgentClass::conversational,  AgentClass::faq,
                                                       AgentClass::question_answer, AgentClass::semantic_search,
                                                       AgentClass::knowledge_graph, AgentClass::not_applicable};

std::set<std::string> string_set(const Json &obj, const char *key, const std::string &path) {
    if (!obj.contains(key)) return {};
    auto v = as<std::vector<std::string>>(obj.at(key), path + "." + key);
    return {v.begin(), v.end()};
}

AgentClass default_class(AgentKind kind) {
    switch (kind) {
    case AgentKind::faq: return AgentClass::faq;
    case AgentKind::search: return AgentClass::semantic_search;
    default: return AgentClass::conversational;
    }
}

void read_common_descriptor(const Json &j, const std::string &path, AgentDescriptor &d) {
    d.name = get<std::string>(j, "name", path);
    if (d.name.empty()) invalid(path + ".name", "must be nonempty");
    d.version = get_or<std::string>(j, "version", path, "1.0.0");
    d.status = enum_or(j, "status", path, registry::AgentStatus::online,
                       {registry::AgentStatus::online, registry::AgentStatus::offline});
    d.scope = enum_or(j, "scope", path, registry::AgentScope::internal,
                      {registry::AgentScope::internal, registry::AgentScope::external});
    d.connection_protocol =
        enum_or(j, "connection_protocol", path, registry::ConnectionProtocol::in_process,
                {registry::ConnectionProtocol::in_process, registry::ConnectionProtocol::external_adapter});
    d.channels_supported = string_set(j, "channels_supported", path);
}

std::optional<Strategy> strategy_from(const Json &obj, const std::string &path) {
    if (!obj.contains("strategy")) return std::nullopt;
    auto s = parse_strategy(as<std::string>(obj.at("strategy"), path + ".strategy"));
    if (!s || *s == Strategy::direct_to_bound) invalid(path + ".strategy", "unknown selection strategy");
    return s;
}

std::optional<PolicyId> policy_from(const Json &obj, const std::string &path) {
    if (!obj.contains("policy")) return std::nullopt;
    auto p = parse_policy(as<std::string>(obj.at("policy"), path + ".policy"));
    if (!p) invalid(path + ".policy", "unknown policy");
    return p;
}

orchestrate::SelectionSettings parse_selection(const Json &j, const std::string &path,
                                               orchestrate::SelectionSettings s) {
    if (auto v = strategy_from(j, path)) s.strategy = *v;
    if (auto v = policy_from(j, path)) s.policy = *v;
    const auto k = get_or<long long>(j, "k", path, static_cast<long long>(s.k));
    if (k < 1) invalid(path + ".k", "must be at least 1");
    s.k = static_cast<std::size_t>(k);
    s.similarity_floor = get_or<double>(j, "similarity_floor", path, s.similarity_floor);
    if (s.similarity_floor < -1.0 || s.similarity_floor > 1.0) invalid(path + ".similarity_floor", "must be in [-1, 1]");
    s.gather_window_ms = get_or<std::int64_t>(j, "gather_window_ms", path, s.gather_window_ms);
    if (s.gather_window_ms <= 0) invalid(path + ".gather_window_ms", "must be positive");
    return s;
}

std::set<std::string> read_list_file(const std::filesystem::path &base, const Json &value, const std::string &path) {
    const auto rel = as<std::string>(value, path);
    const auto full = std::filesystem::path(rel).is_absolute() ? std::filesystem::path(rel) : base / rel;
    try {
        return orchestrate::load_word_list(full);
    } catch (const Error &) {
        invalid(path, "cannot read " + full.string());
    }
}

agents::GoalSpec goal_spec(const AgentConfig &a) {
    const std::string path = "fixture";
    agents::GoalSpec spec;
    spec.agent_name = a.descriptor.name;
    spec.description = a.description;
    const auto &intents = require(a.fixture, "intents", path);
    if (!intents.is_array() || intents.empty()) invalid(path + ".intents", "needs at least one intent");
    for (std::size_t i = 0; i < intents.size(); ++i) {
        const auto ip = path + ".intents[" + std::to_string(i) + "]";
        const auto &j = intents[i];
        agents::IntentSpec intent;
        intent.name = get<std::string>(j, "name", ip);
        intent.phrases = get<std::vector<std::string>>(j, "phrases", ip);
        if (intent.name.empty()) invalid(ip + ".name", "must be nonempty");
        if (intent.phrases.empty()) invalid(ip + ".phrases", "needs at least one phrase");
        if (j.contains("slots")) {
            const auto &slots = j.at("slots");
            for (std::size_t s = 0; s < slots.size(); ++s) {
                const auto sp = ip + ".slots[" + std::to_string(s) + "]";
                agents::SlotSpec slot{get<std::string>(slots[s], "name", sp), get<std::string>(slots[s], "prompt", sp),
                                      get_or<std::string>(slots[s], "validator", sp, "text")};
                if (!agents::known_validator(slot.validator)) invalid(sp + ".validator", "unknown validator '" + slot.validator + "'");
                intent.slots.push_back(std::move(slot));
            }
        }
        if (j.contains("confirm")) intent.confirm_prompt = get<std::string>(j, "confirm", ip);
        intent.fulfillment = get<std::string>(j, "fulfillment", ip);
        spec.intents.push_back(std::move(intent));
    }
    return spec;
}

std::shared_ptr<agents::Adapter> make_adapter(const AgentConfig &a) {
    const std::string path = "fixture";
    switch (a.kind) {
    case AgentKind::goal: {
        auto agent = std::make_shared<agents::GoalAgent>(goal_spec(a));
        return std::make_shared<agents::JsonDialogAdapter>([agent](const Json &req) { return agent->dialog(req); });
    }
    case AgentKind::human_connect: {
        auto agent = std::make_shared<agents::HumanConnectAgent>(a.descriptor.name, a.description);
        return std::make_shared<agents::JsonDialogAdapter>([agent](const Json &req) { return agent->dialog(req); });
    }
    case AgentKind::faq: {
        std::vector<agents::FaqPair> pairs;
        const auto &faqs = require(a.fixture, "faqs", path);
        for (std::size_t i = 0; i < faqs.size(); ++i) {
            const auto fp = path + ".faqs[" + std::to_string(i) + "]";
            pairs.push_back(agents::FaqPair::make(get<std::string>(faqs[i], "question", fp),
                                                  get<std::string>(faqs[i], "answer", fp)));
        }
        auto agent = std::make_shared<agents::FaqAgent>(
            a.descriptor.name, a.description, std::move(pairs),
            get_or<double>(a.fixture, "threshold", path, agents::default_faq_threshold));
        return std::make_shared<agents::ScoredAnswerAdapter>([agent](std::string_view q) { return agent->ask(q); });
    }
    case AgentKind::search: {
        std::vector<agents::SearchDocument> docs;
        const auto &documents = require(a.fixture, "documents", path);
        for (std::size_t i = 0; i < documents.size(); ++i) {
            const auto dp = path + ".documents[" + std::to_string(i) + "]";
            docs.push_back(agents::SearchDocument::make(get<std::string>(documents[i], "title", dp),
                                                        get<std::string>(documents[i], "body", dp)));
        }
        auto agent = std::make_shared<agents::SearchAgent>(
            a.descriptor.name, a.description, std::move(docs),
            get_or<double>(a.fixture, "floor", path, agents::default_search_floor),
            get_or<double>(a.fixture, "damping", path, agents::default_search_damping));
        return std::make_shared<agents::ScoredAnswerAdapter>([agent](std::string_view q) { return agent->ask(q); });
    }
    case AgentKind::scripted: {
        const auto &script = require(a.fixture, "script", path);
        agents::Verdict verdict;
        const auto disposition = parse_disposition(get_or<std::string>(script, "disposition", path + ".script", "in_scope"));
        if (!disposition) invalid(path + ".script.disposition", "unknown disposition");
        verdict.disposition = *disposition;
        if (script.contains("confidence")) verdict.confidence = get<double>(script, "confidence", path + ".script");
        if (script.contains("intent")) verdict.intent = get<std::string>(script, "intent", path + ".script");
        verdict.reply_text = get_or<std::string>(script, "reply", path + ".script", "");
        const auto latency = get_or<std::int64_t>(script, "latency_ms", path + ".script", 0);
        return std::make_shared<agents::ScriptedAdapter>([verdict, latency](const agents::AgentCall &, agents::CallTimer &t) {
            t.sleep(latency);
            return verdict;
        });
    }
    }
    invalid(path, "unsupported agent kind");
}

}  // namespace

std::optional<std::string> AppConfig::parent_of(std::string_view node_id) const {
    for (const auto &pod : pods) {
        if (std::find(pod.members.begin(), pod.members.end(), node_id) != pod.members.end()) return pod.descriptor.agent_id;
    }
    return std::nullopt;
}

AgentConfig parse_agent_config(const Json &j, const std::string &path) {
    AgentConfig a;
    a.descriptor.agent_id = get<std::string>(j, "agent_id", path);
    if (a.descriptor.agent_id.empty()) invalid(path + ".agent_id", "must be nonempty");
    read_common_descriptor(j, path, a.descriptor);
    a.kind = parse_enum(require(j, "kind", path), path + ".kind",
                        {AgentKind::goal, AgentKind::faq, AgentKind::search, AgentKind::human_connect, AgentKind::scripted});
    a.descriptor.node_type = NodeType::agent;
    a.descriptor.agent_class = enum_or(j, "agent_class", path, default_class(a.kind), all_classes);
    if (a.descriptor.agent_class == AgentClass::not_applicable) invalid(path + ".agent_class", "reserved for pods");
    a.description = get_or<std::string>(j, "description", path, "");
    a.training_utterances = get_or<std::vector<std::string>>(j, "training_utterances", path, {});
    a.processing_ms = get_or<std::int64_t>(j, "processing_ms", path, 0);
    if (a.processing_ms < 0) invalid(path + ".processing_ms", "must be non-negative");
    a.fixture = j;
    validate_agent_fixture(a, path);
    return a;
}

void validate_agent_fixture(const AgentConfig &agent, const std::string &path) {
    try {
        (void)make_adapter(agent);
    } catch (const Error &e) {
        const std::string msg = e.what();
        // Paths from the fixture builders are relative to the agent entry.
        if (e.code() == ErrorCode::validation_error && msg.rfind("fixture", 0) == 0) {
            throw Error(ErrorCode::validation_error, path + msg.substr(std::string("fixture").size()));
        }
        invalid(path, msg);
    } catch (const nlohmann::json::exception &e) {
        invalid(path, e.what());
    }
}

std::shared_ptr<agents::NodeHandler> make_agent_handler(const AgentConfig &agent, std::int64_t budget_ms) {
    return std::make_shared<agents::AdapterHandler>(make_adapter(agent), agents::AdapterOptions{budget_ms, agent.processing_ms});
}

Json descriptor_summary(const registry::AgentDescriptor &d) {
    return Json{{"agent_id", d.agent_id},
                {"name", d.name},
                {"version", d.version},
                {"node_type", registry::to_string(d.node_type)},
                {"status", registry::to_string(d.status)},
                {"agent_class", registry::to_string(d.agent_class)},
                {"rating", d.rating},
                {"avg_response_time_ms", d.avg_response_time_ms}};
}

AppConfig load_config(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::parse_error, "line 0: cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

AppConfig parse_config(std::string_view text, const std::filesystem::path &base_dir) {
    Json root;
    try {
        root = Json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        const auto upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        throw Error(ErrorCode::parse_error, "line " + std::to_string(line) + ": " + e.what());
    }
    if (!root.is_object()) invalid("$", "expected an object");

    AppConfig cfg;

    // App descriptor.
    const auto &app = require(root, "app", "$");
    cfg.app.app_id = get<std::string>(app, "app_id", "app");
    if (cfg.app.app_id.empty()) invalid("app.app_id", "must be nonempty");
    cfg.app.name = get_or<std::string>(app, "name", "app", cfg.app.app_id);
    cfg.app.channel_ids = string_set(app, "channel_ids", "app");
    if (cfg.app.channel_ids.empty()) invalid("app.channel_ids", "needs at least one channel");
    for (const auto &c : cfg.app.channel_ids) {
        if (c != "cli" && c != "web") invalid("app.channel_ids", "unsupported channel '" + c + "'");
    }
    if (app.contains("serving_matrix")) {
        for (const auto &[channel, classes] : app.at("serving_matrix").items()) {
            const auto mp = "app.serving_matrix." + channel;
            if (!cfg.app.channel_ids.count(channel)) invalid(mp, "channel not in channel_ids");
            auto &row = cfg.app.serving_matrix[channel];
            for (std::size_t i = 0; i < classes.size(); ++i) {
                row.insert(parse_enum(classes[i], mp + "[" + std::to_string(i) + "]", all_classes));
            }
        }
    }
    cfg.app.resilience_rating = get_or<int>(app, "resilience_rating", "app", 3);
    if (cfg.app.resilience_rating < 1 || cfg.app.resilience_rating > 5) invalid("app.resilience_rating", "must be 1-5");
    cfg.app.data_classification = enum_or(app, "data_classification", "app", registry::DataClassification::internal,
                                          {registry::DataClassification::public_, registry::DataClassification::internal,
                                           registry::DataClassification::sensitive});

    auto &s = cfg.settings;
    s.app_id = cfg.app.app_id;
    if (root.contains("selection")) s.selection = parse_selection(root.at("selection"), "selection", s.selection);

    if (root.contains("lexicons")) {
        const auto &lex = root.at("lexicons");
        if (lex.contains("positive")) s.lexicons.positive = read_list_file(base_dir, lex.at("positive"), "lexicons.positive");
        if (lex.contains("negative")) s.lexicons.negative = read_list_file(base_dir, lex.at("negative"), "lexicons.negative");
        if (lex.contains("profanity")) s.lexicons.profanity = read_list_file(base_dir, lex.at("profanity"), "lexicons.profanity");
    }

    std::optional<std::string> human_agent;
    if (root.contains("handover")) {
        const auto &h = root.at("handover");
        if (h.contains("phrases")) s.handover.phrases = get<std::vector<std::string>>(h, "phrases", "handover");
        if (h.contains("phrases_file")) {
            const auto phrases = read_list_file(base_dir, h.at("phrases_file"), "handover.phrases_file");
            s.handover.phrases.assign(phrases.begin(), phrases.end());
        }
        s.handover.sentiment_threshold = get_or<double>(h, "sentiment_threshold", "handover", s.handover.sentiment_threshold);
        s.handover.oos_threshold = get_or<int>(h, "oos_threshold", "handover", s.handover.oos_threshold);
        if (s.handover.oos_threshold < 1) invalid("handover.oos_threshold", "must be at least 1");
        if (h.contains("human_agent_id")) human_agent = get<std::string>(h, "human_agent_id", "handover");
    }

    if (root.contains("messages")) {
        const auto &m = root.at("messages");
        s.fallback_message = get_or<std::string>(m, "fallback", "messages", s.fallback_message);
        s.handover_message = get_or<std::string>(m, "handover", "messages", s.handover_message);
        s.greeting = get_or<std::string>(m, "greeting", "messages", s.greeting);
        s.persona_greetings = get_or<std::map<std::string, std::string>>(m, "persona_greetings", "messages", {});
    }

    cfg.adapter_budget_ms = get_or<std::int64_t>(root, "adapter_budget_ms", "$", cfg.adapter_budget_ms);
    if (cfg.adapter_budget_ms <= 0) invalid("adapter_budget_ms", "must be positive");

    // Nodes.
    std::map<std::string, std::string> seen;  // id -> path of first definition
    auto claim = [&](const std::string &id, const std::string &path) {
        auto [it, fresh] = seen.emplace(id, path);
        if (!fresh) invalid(path, "duplicate id '" + id + "' (first defined at " + it->second + ")");
    };

    const Json agents_json = root.value("agents", Json::array());
    for (std::size_t i = 0; i < agents_json.size(); ++i) {
        const auto path = "agents[" + std::to_string(i) + "]";
        cfg.agents.push_back(parse_agent_config(agents_json[i], path));
        claim(cfg.agents.back().descriptor.agent_id, path + ".agent_id");
    }

    const Json pods_json = root.value("pods", Json::array());
    for (std::size_t i = 0; i < pods_json.size(); ++i) {
        const auto path = "pods[" + std::to_string(i) + "]";
        const auto &j = pods_json[i];
        PodConfig pod;
        pod.descriptor.agent_id = get<std::string>(j, "pod_id", path);
        if (pod.descriptor.agent_id.empty()) invalid(path + ".pod_id", "must be nonempty");
        claim(pod.descriptor.agent_id, path + ".pod_id");
        read_common_descriptor(j, path, pod.descriptor);
        pod.descriptor.node_type = NodeType::pod;
        pod.descriptor.agent_class = AgentClass::not_applicable;
        pod.description = get_or<std::string>(j, "description", path, "");
        pod.members = get_or<std::vector<std::string>>(j, "members", path, {});

        // Pods default to broadcast inside; anything else comes from the app.
        orchestrate::SelectionSettings inherited = s.selection;
        inherited.strategy = Strategy::broadcast_only;
        const auto sel = j.contains("selection") ? parse_selection(j.at("selection"), path + ".selection", inherited) : inherited;
        pod.settings = agents::PodSettings{sel.strategy, sel.k, sel.similarity_floor, sel.policy, sel.gather_window_ms};
        cfg.pods.push_back(std::move(pod));
    }

    // Membership: members exist, each node has at most one parent, no cycles.
    std::map<std::string, std::string> parent;
    for (std::size_t i = 0; i < cfg.pods.size(); ++i) {
        const auto &pod = cfg.pods[i];
        for (std::size_t m = 0; m < pod.members.size(); ++m) {
            const auto mp = "pods[" + std::to_string(i) + "].members[" + std::to_string(m) + "]";
            const auto &member = pod.members[m];
            if (!seen.count(member)) invalid(mp, "unknown member '" + member + "'");
            if (member == pod.descriptor.agent_id) invalid(mp, "cyclic_pod: '" + member + "' contains itself");
            auto [it, fresh] = parent.emplace(member, pod.descriptor.agent_id);
            if (!fresh) invalid(mp, "'" + member + "' already belongs to pod '" + it->second + "'");
        }
    }
    for (std::size_t i = 0; i < cfg.pods.size(); ++i) {
        const auto &start = cfg.pods[i].descriptor.agent_id;
        std::string chain = start;
        std::set<std::string> visited{start};
        for (auto it = parent.find(start); it != parent.end(); it = parent.find(it->second)) {
            chain += " -> " + it->second;
            if (!visited.insert(it->second).second) {
                invalid("pods[" + std::to_string(i) + "].members", "cyclic_pod: " + chain);
            }
        }
    }

    // Human-connect agent: explicit, or the first agent of that kind.
    if (!human_agent) {
        for (const auto &a : cfg.agents) {
            if (a.kind == AgentKind::human_connect) {
                human_agent = a.descriptor.agent_id;
                break;
            }
        }
    }
    if (human_agent) {
        auto it = std::find_if(cfg.agents.begin(), cfg.agents.end(),
                               [&](const AgentConfig &a) { return a.descriptor.agent_id == *human_agent; });
        if (it == cfg.agents.end()) invalid("handover.human_agent_id", "unknown agent '" + *human_agent + "'");
        if (parent.count(*human_agent)) invalid("handover.human_agent_id", "must be a top-level agent");
    }
    s.human_agent_id = human_agent;

    const Json users = root.value("users", Json::array());
    for (std::size_t i = 0; i < users.size(); ++i) {
        const auto path = "users[" + std::to_string(i) + "]";
        stores::UserProfile p;
        p.user_id = get<std::string>(users[i], "user_id", path);
        p.channel_identities = get_or<std::map<std::string, std::string>>(users[i], "channel_identities", path, {});
        p.persona_hint = get_or<std::string>(users[i], "persona_hint", path, "");
        cfg.users.push_back(std::move(p));
    }

    const Json rules = root.value("routing_rules", Json::array());
    for (std::size_t i = 0; i < rules.size(); ++i) {
        const auto path = "routing_rules[" + std::to_string(i) + "]";
        stores::RoutingRule r;
        r.user_id = get<std::string>(rules[i], "user_id", path);
        r.preferred_agent_id = get<std::string>(rules[i], "preferred_agent_id", path);
        r.reason = get_or<std::string>(rules[i], "reason", path, "");
        if (!seen.count(r.preferred_agent_id)) invalid(path + ".preferred_agent_id", "unknown agent '" + r.preferred_agent_id + "'");
        if (parent.count(r.preferred_agent_id)) invalid(path + ".preferred_agent_id", "must be a top-level node");
        cfg.routing_rules.push_back(std::move(r));
    }

    return cfg;
}

}  // namespace lpar::gateway
