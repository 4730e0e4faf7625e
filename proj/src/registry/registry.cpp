#include "lpar/registry/registry.hpp"

#include <algorithm>
#include <mutex>

#include "lpar/common/error.hpp"

namespace lpar::registry {

std::string_view to_string(DataClassification v) noexcept {
    switch (v) {
    case DataClassification::public_: return "public";
    case DataClassification::internal: return "internal";
    case DataClassification::sensitive: return "sensitive";
    }
    return "internal";
}

std::string_view to_string(NodeType v) noexcept { return v == NodeType::pod ? "pod" : "agent"; }

std::string_view to_string(ConnectionProtocol v) noexcept {
    return v == ConnectionProtocol::external_adapter ? "external_adapter" : "in_process";
}

std::string_view to_string(AgentStatus v) noexcept { return v == AgentStatus::offline ? "offline" : "online"; }

std::string_view to_string(AgentScope v) noexcept { return v == AgentScope::external ? "external" : "internal"; }

std::string_view to_string(AgentClass v) noexcept {
    switch (v) {
    case AgentClass::conversational: return "conversational";
    case AgentClass::faq: return "faq";
    case AgentClass::question_answer: return "question_answer";
    case AgentClass::semantic_search: return "semantic_search";
    case AgentClass::knowledge_graph: return "knowledge_graph";
    case AgentClass::not_applicable: return "not_applicable";
    }
    return "not_applicable";
}

std::string app_broadcast_request_topic(std::string_view app_id) { return std::string(app_id) + "/bcast/req"; }
std::string app_broadcast_response_topic(std::string_view app_id) { return std::string(app_id) + "/bcast/resp"; }
std::string pod_broadcast_request_topic(std::string_view pod_id) { return "pod/" + std::string(pod_id) + "/bcast/req"; }
std::string pod_broadcast_response_topic(std::string_view pod_id) { return "pod/" + std::string(pod_id) + "/bcast/resp"; }

Registry::Registry(bus::MessageBus &bus) : bus_(bus) {}

Registry::~Registry() = default;

void Registry::register_app(AppDescriptor descriptor) {
    if (descriptor.app_id.empty()) throw Error(ErrorCode::invalid_descriptor, "app_id must be nonempty");
    if (descriptor.resilience_rating < 1 || descriptor.resilience_rating > 5) {
        throw Error(ErrorCode::invalid_descriptor, "resilience_rating must be 1-5");
    }
    for (const auto &[channel, classes] : descriptor.serving_matrix) {
        if (!descriptor.channel_ids.count(channel)) {
            throw Error(ErrorCode::invalid_descriptor, "serving_matrix channel not in channel_ids: " + channel);
        }
    }
    std::unique_lock lock(mutex_);
    if (apps_.count(descriptor.app_id)) throw Error(ErrorCode::duplicate_app, "app already registered: " + descriptor.app_id);
    bus_.ensure_topic(bus::TopicKind::broadcast_request, app_broadcast_request_topic(descriptor.app_id));
    bus_.ensure_topic(bus::TopicKind::broadcast_response, app_broadcast_response_topic(descriptor.app_id));
    top_level_[descriptor.app_id];
    apps_.emplace(descriptor.app_id, std::move(descriptor));
}

AppDescriptor Registry::route_app(std::string_view app_id) const {
    std::shared_lock lock(mutex_);
    auto it = apps_.find(app_id);
    if (it == apps_.end()) throw Error(ErrorCode::unknown_app, "unknown app: " + std::string(app_id));
    return it->second;
}

std::vector<AppDescriptor> Registry::apps() const {
    std::shared_lock lock(mutex_);
    std::vector<AppDescriptor> out;
    for (const auto &[id, app] : apps_) out.push_back(app);
    return out;
}

bool Registry::has_app(std::string_view app_id) const {
    std::shared_lock lock(mutex_);
    return apps_.find(app_id) != apps_.end();
}

const Registry::AgentEntry &Registry::entry_locked(std::string_view agent_id) const {
    auto it = agents_.find(agent_id);
    if (it == agents_.end()) throw Error(ErrorCode::unknown_agent, "unknown agent: " + std::string(agent_id));
    return it->second;
}

Registry::AgentEntry &Registry::entry_locked(std::string_view agent_id) {
    auto it = agents_.find(agent_id);
    if (it == agents_.end()) throw Error(ErrorCode::unknown_agent, "unknown agent: " + std::string(agent_id));
    return it->second;
}

void Registry::subscribe_to_parent_locked(AgentEntry &entry) {
    entry.broadcast_sub.reset();
    if (entry.descriptor.status != AgentStatus::online) return;
    const auto &d = entry.descriptor;
    const auto topic_name = d.parent_pod ? pod_broadcast_request_topic(*d.parent_pod) : app_broadcast_request_topic(d.app_id);
    entry.broadcast_sub = bus_.subscribe(bus_.topic(topic_name), d.agent_id);
}

void Registry::collect_utterances_locked(const std::string &agent_id, std::vector<std::string> &out) const {
    const auto &entry = entry_locked(agent_id);
    out.insert(out.end(), entry.utterances.begin(), entry.utterances.end());
    for (const auto &member : entry.members) collect_utterances_locked(member, out);
}

void Registry::refresh_pod_centroids_locked(std::optional<std::string> pod_id) {
    while (pod_id) {
        auto it = agents_.find(*pod_id);
        if (it == agents_.end()) return;
        std::vector<std::string> utterances;
        collect_utterances_locked(*pod_id, utterances);
        std::vector<embed::Embedding> vectors;
        vectors.reserve(utterances.size());
        for (const auto &u : utterances) vectors.push_back(embed::embed_text(u));
        it->second.descriptor.centroid = embed::centroid_of(vectors);
        pod_id = it->second.descriptor.parent_pod;
    }
}

void Registry::register_agent(const std::string &app_id, AgentDescriptor descriptor,
                              std::vector<std::string> training_utterances, std::optional<std::string> parent_pod) {
    if (descriptor.agent_id.empty()) throw Error(ErrorCode::invalid_descriptor, "agent_id must be nonempty");
    if (descriptor.node_type == NodeType::pod && descriptor.agent_class != AgentClass::not_applicable) {
        throw Error(ErrorCode::invalid_descriptor, "pod " + descriptor.agent_id + " must have agent_class not_applicable");
    }
    std::unique_lock lock(mutex_);
    if (!apps_.count(app_id)) throw Error(ErrorCode::unknown_app, "unknown app: " + app_id);
    if (agents_.count(descriptor.agent_id)) throw Error(ErrorCode::duplicate_agent, "agent already registered: " + descriptor.agent_id);
    if (parent_pod) {
        auto pit = agents_.find(*parent_pod);
        if (pit == agents_.end() || pit->second.descriptor.node_type != NodeType::pod ||
            pit->second.descriptor.app_id != app_id) {
            throw Error(ErrorCode::unknown_pod, "unknown pod: " + *parent_pod);
        }
    }

    const auto &id = descriptor.agent_id;
    descriptor.app_id = app_id;
    descriptor.parent_pod = parent_pod;
    descriptor.rating = Rating::Beginner;
    descriptor.avg_response_time_ms = 0.0;
    descriptor.private_request_topic = bus::private_request_topic_name(id);
    descriptor.private_response_topic = bus::private_response_topic_name(id);
    const auto req = bus_.ensure_topic(bus::TopicKind::private_request, descriptor.private_request_topic);
    bus_.ensure_topic(bus::TopicKind::private_response, descriptor.private_response_topic);
    if (descriptor.node_type == NodeType::pod) {
        bus_.ensure_topic(bus::TopicKind::broadcast_request, pod_broadcast_request_topic(id));
        bus_.ensure_topic(bus::TopicKind::broadcast_response, pod_broadcast_response_topic(id));
    }

    std::vector<embed::Embedding> vectors;
    vectors.reserve(training_utterances.size());
    for (const auto &u : training_utterances) vectors.push_back(embed::embed_text(u));
    descriptor.centroid = embed::centroid_of(vectors);

    AgentEntry entry;
    entry.descriptor = std::move(descriptor);
    entry.utterances = std::move(training_utterances);
    entry.private_sub = bus_.subscribe(req, entry.descriptor.agent_id);
    subscribe_to_parent_locked(entry);

    const std::string agent_id = entry.descriptor.agent_id;
    agents_.emplace(agent_id, std::move(entry));
    if (parent_pod) {
        agents_.at(*parent_pod).members.push_back(agent_id);
    } else {
        top_level_[app_id].push_back(agent_id);
    }
    refresh_pod_centroids_locked(parent_pod);
}

void Registry::remove_subtree_locked(const std::string &agent_id, std::vector<std::string> &removed) {
    auto it = agents_.find(agent_id);
    if (it == agents_.end()) return;
    const auto members = it->second.members;
    for (const auto &member : members) remove_subtree_locked(member, removed);
    agents_.erase(agent_id);
    removed.push_back(agent_id);
}

void Registry::deregister_agent(const std::string &agent_id) {
    std::vector<std::string> removed;
    std::vector<DeregisterListener> listeners;
    {
        std::unique_lock lock(mutex_);
        const auto &entry = entry_locked(agent_id);
        const auto parent = entry.descriptor.parent_pod;
        const auto app_id = entry.descriptor.app_id;
        if (parent) {
            auto &siblings = agents_.at(*parent).members;
            std::erase(siblings, agent_id);
        } else {
            std::erase(top_level_[app_id], agent_id);
        }
        remove_subtree_locked(agent_id, removed);
        refresh_pod_centroids_locked(parent);
        listeners = listeners_;
    }
    for (const auto &id : removed) {
        for (const auto &listener : listeners) listener(id);
    }
}

void Registry::add_pod_member(const std::string &pod_id, const std::string &member_id) {
    std::unique_lock lock(mutex_);
    auto &pod = entry_locked(pod_id);
    if (pod.descriptor.node_type != NodeType::pod) throw Error(ErrorCode::unknown_pod, "not a pod: " + pod_id);
    auto &member = entry_locked(member_id);
    if (member.descriptor.app_id != pod.descriptor.app_id) {
        throw Error(ErrorCode::invalid_descriptor, "pod and member belong to different apps");
    }
    // Walking up from the pod must not reach the member.
    for (std::optional<std::string> cur = pod_id; cur; cur = entry_locked(*cur).descriptor.parent_pod) {
        if (*cur == member_id) throw Error(ErrorCode::cyclic_pod, "adding " + member_id + " to " + pod_id + " forms a cycle");
    }
    if (member.descriptor.parent_pod == pod_id) return;

    const auto old_parent = member.descriptor.parent_pod;
    if (old_parent) {
        std::erase(entry_locked(*old_parent).members, member_id);
    } else {
        std::erase(top_level_[member.descriptor.app_id], member_id);
    }
    member.descriptor.parent_pod = pod_id;
    pod.members.push_back(member_id);
    subscribe_to_parent_locked(member);
    refresh_pod_centroids_locked(old_parent);
    refresh_pod_centroids_locked(pod_id);
}

std::vector<RankedAgent> Registry::rank_by_centroid(const std::string &app_id, const embed::Embedding &query,
                                                    std::size_t k, double floor) const {
    return rank_scope(Scope::app(app_id), query, k, floor);
}

std::vector<RankedAgent> Registry::rank_scope(const Scope &scope, const embed::Embedding &query, std::size_t k,
                                              double floor) const {
    if (k < 1) throw Error(ErrorCode::invalid_argument, "k must be at least 1");
    if (floor < -1.0 || floor > 1.0) throw Error(ErrorCode::invalid_argument, "floor must lie in [-1, 1]");
    std::vector<RankedAgent> ranked;
    std::shared_lock lock(mutex_);
    for (const auto &id : scope_members_locked(scope, true)) {
        auto it = agents_.find(id);
        const double sim = embed::cosine(query, it->second.descriptor.centroid.embedding);
        if (sim >= floor) ranked.push_back({id, sim});
    }
    std::sort(ranked.begin(), ranked.end(), [](const RankedAgent &a, const RankedAgent &b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.agent_id < b.agent_id;
    });
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

void Registry::update_status(const std::string &agent_id, AgentStatus status) {
    std::unique_lock lock(mutex_);
    auto &entry = entry_locked(agent_id);
    if (entry.descriptor.status == status) return;
    entry.descriptor.status = status;
    subscribe_to_parent_locked(entry);
}

void Registry::update_rating(const std::string &agent_id, Rating rating) {
    std::unique_lock lock(mutex_);
    entry_locked(agent_id).descriptor.rating = rating;
}

void Registry::record_latency(const std::string &agent_id, double latency_ms) {
    std::unique_lock lock(mutex_);
    auto &avg = entry_locked(agent_id).descriptor.avg_response_time_ms;
    avg = latency_ewma_alpha * latency_ms + (1.0 - latency_ewma_alpha) * avg;
}

bool Registry::has_agent(std::string_view agent_id) const {
    std::shared_lock lock(mutex_);
    return agents_.find(agent_id) != agents_.end();
}

AgentDescriptor Registry::descriptor(std::string_view agent_id) const {
    std::shared_lock lock(mutex_);
    return entry_locked(agent_id).descriptor;
}

std::vector<AgentDescriptor> Registry::agents(std::string_view app_id) const {
    std::shared_lock lock(mutex_);
    std::vector<AgentDescriptor> out;
    for (const auto &[id, entry] : agents_) {
        if (entry.descriptor.app_id == app_id) out.push_back(entry.descriptor);
    }
    return out;
}

std::vector<std::string> Registry::training_utterances(std::string_view agent_id) const {
    std::shared_lock lock(mutex_);
    return entry_locked(agent_id).utterances;
}

PodMembership Registry::pod_membership(std::string_view pod_id) const {
    std::shared_lock lock(mutex_);
    const auto &entry = entry_locked(pod_id);
    if (entry.descriptor.node_type != NodeType::pod) throw Error(ErrorCode::unknown_pod, "not a pod: " + std::string(pod_id));
    return {std::string(pod_id), entry.members};
}

std::vector<std::string> Registry::scope_members(const Scope &scope, bool online_only) const {
    std::shared_lock lock(mutex_);
    return scope_members_locked(scope, online_only);
}

std::vector<std::string> Registry::scope_members_locked(const Scope &scope, bool online_only) const {
    const std::vector<std::string> *ids = nullptr;
    if (scope.pod_id) {
        auto it = agents_.find(*scope.pod_id);
        if (it == agents_.end() || it->second.descriptor.node_type != NodeType::pod) {
            throw Error(ErrorCode::unknown_scope, "unknown pod scope: " + *scope.pod_id);
        }
        ids = &it->second.members;
    } else {
        if (!apps_.count(scope.app_id)) throw Error(ErrorCode::unknown_scope, "unknown app scope: " + scope.app_id);
        auto it = top_level_.find(scope.app_id);
        static const std::vector<std::string> none;
        ids = it == top_level_.end() ? &none : &it->second;
    }
    std::vector<std::string> out;
    for (const auto &id : *ids) {
        auto it = agents_.find(id);
        if (it == agents_.end()) continue;
        if (online_only && it->second.descriptor.status != AgentStatus::online) continue;
        out.push_back(id);
    }
    return out;
}

std::pair<bus::TopicId, bus::TopicId> Registry::broadcast_topics(const Scope &scope) const {
    {
        std::shared_lock lock(mutex_);
        if (scope.pod_id) {
            auto it = agents_.find(*scope.pod_id);
            if (it == agents_.end() || it->second.descriptor.node_type != NodeType::pod) {
                throw Error(ErrorCode::unknown_scope, "unknown pod scope: " + *scope.pod_id);
            }
        } else if (!apps_.count(scope.app_id)) {
            throw Error(ErrorCode::unknown_scope, "unknown app scope: " + scope.app_id);
        }
    }
    if (scope.pod_id) {
        return {bus_.topic(pod_broadcast_request_topic(*scope.pod_id)), bus_.topic(pod_broadcast_response_topic(*scope.pod_id))};
    }
    return {bus_.topic(app_broadcast_request_topic(scope.app_id)), bus_.topic(app_broadcast_response_topic(scope.app_id))};
}

Rating Registry::rating_of(std::string_view agent_id) const {
    std::shared_lock lock(mutex_);
    auto it = agents_.find(agent_id);
    return it == agents_.end() ? Rating::Beginner : it->second.descriptor.rating;
}

bool Registry::eligible(std::string_view agent_id, std::string_view channel_id) const {
    std::shared_lock lock(mutex_);
    auto it = agents_.find(agent_id);
    if (it == agents_.end()) return false;
    const auto &d = it->second.descriptor;
    if (d.node_type == NodeType::pod) return true;
    if (!d.channels_supported.empty() && !d.channels_supported.count(std::string(channel_id))) return false;
    const auto &app = apps_.at(d.app_id);
    auto row = app.serving_matrix.find(std::string(channel_id));
    if (row == app.serving_matrix.end()) return true;
    return row->second.count(d.agent_class) > 0;
}

void Registry::on_deregister(DeregisterListener listener) {
    std::unique_lock lock(mutex_);
    listeners_.push_back(std::move(listener));
}

}  // namespace lpar::registry
