#include "lpar/stores/stores.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "lpar/common/error.hpp"
#include "lpar/common/text.hpp"
#include "lpar/orchestrate/text_services.hpp"

namespace lpar::stores {

namespace {

// "s-42" -> 42
std::uint64_t numeric_suffix(std::string_view id) {
    const auto dash = id.rfind('-');
    if (dash == std::string_view::npos) return 0;
    std::uint64_t value = 0;
    const auto tail = id.substr(dash + 1);
    std::from_chars(tail.data(), tail.data() + tail.size(), value);
    return value;
}

}  // namespace

Rating rating_band(double mean_score, std::size_t sample_count) {
    if (sample_count < rating_sample_floor) return Rating::Beginner;
    if (mean_score < 2.0) return Rating::Beginner;
    if (mean_score < 3.0) return Rating::Intermediate;
    if (mean_score < 4.0) return Rating::Professional;
    return Rating::Expert;
}

// ---------------------------------------------------------------- sessions

SessionStore::SessionStore(const registry::Registry &registry, LogicalClock &clock)
    : registry_(registry), clock_(clock) {}

SessionRecord SessionStore::open_session(const std::string &app_id, const std::string &user_id,
                                         const std::string &channel_id) {
    const auto app = registry_.route_app(app_id);
    if (!app.channel_ids.count(channel_id)) {
        throw Error(ErrorCode::unsupported_channel, "app " + app_id + " does not serve channel " + channel_id);
    }
    SessionRecord record;
    record.session_id = ids_.next();
    record.app_id = app_id;
    record.user_id = user_id;
    record.channel_id = channel_id;
    record.created_at = record.updated_at = clock_.now();

    std::lock_guard lock(mutex_);
    dirty_.insert(record.session_id);
    sessions_.emplace(record.session_id, record);
    return record;
}

SessionRecord &SessionStore::at_locked(std::string_view session_id) {
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw Error(ErrorCode::unknown_session, "unknown session: " + std::string(session_id));
    return it->second;
}

SessionRecord &SessionStore::live_locked(std::string_view session_id) {
    auto &record = at_locked(session_id);
    if (record.status != SessionStatus::active) {
        throw Error(ErrorCode::session_not_active,
                    "session " + record.session_id + " is " + std::string(to_string(record.status)));
    }
    return record;
}

void SessionStore::touch_locked(SessionRecord &record) {
    record.updated_at = clock_.now();
    dirty_.insert(record.session_id);
}

SessionRecord SessionStore::get(std::string_view session_id) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw Error(ErrorCode::unknown_session, "unknown session: " + std::string(session_id));
    return it->second;
}

bool SessionStore::contains(std::string_view session_id) const {
    std::lock_guard lock(mutex_);
    return sessions_.find(session_id) != sessions_.end();
}

std::vector<SessionRecord> SessionStore::all() const {
    std::lock_guard lock(mutex_);
    std::vector<SessionRecord> out;
    for (const auto &[id, record] : sessions_) out.push_back(record);
    return out;
}

std::optional<std::string> SessionStore::live_session_for(std::string_view app_id, std::string_view user_id) const {
    std::lock_guard lock(mutex_);
    const SessionRecord *best = nullptr;
    for (const auto &[id, record] : sessions_) {
        if (record.app_id != app_id || record.user_id != user_id || record.status == SessionStatus::closed) continue;
        if (!best || numeric_suffix(record.session_id) > numeric_suffix(best->session_id)) best = &record;
    }
    if (!best) return std::nullopt;
    return best->session_id;
}

void SessionStore::bind_serving_agent(const std::string &session_id, const std::string &agent_id) {
    if (!registry_.has_agent(agent_id)) throw Error(ErrorCode::unknown_agent, "unknown agent: " + agent_id);
    std::lock_guard lock(mutex_);
    auto &record = live_locked(session_id);
    record.serving_agent_id = agent_id;
    touch_locked(record);
}

void SessionStore::unbind(const std::string &session_id) {
    std::lock_guard lock(mutex_);
    auto &record = live_locked(session_id);
    record.serving_agent_id.reset();
    touch_locked(record);
}

std::vector<std::string> SessionStore::unbind_agent(const std::string &agent_id) {
    std::lock_guard lock(mutex_);
    std::vector<std::string> affected;
    for (auto &[id, record] : sessions_) {
        if (record.status == SessionStatus::active && record.serving_agent_id == agent_id) {
            record.serving_agent_id.reset();
            touch_locked(record);
            affected.push_back(id);
        }
    }
    return affected;
}

ContextSnapshot SessionStore::merge_context(const std::string &session_id, const std::vector<std::string> &intents,
                                            const EntityMap &entities) {
    std::lock_guard lock(mutex_);
    auto &record = at_locked(session_id);
    auto &ctx = record.context;
    for (const auto &intent : intents) ctx.intents.push_back(intent);
    while (ctx.intents.size() > ContextSnapshot::max_intents) ctx.intents.erase(ctx.intents.begin());
    for (const auto &[k, v] : entities) ctx.entities.set(k, v);
    while (ctx.entities.size() > ContextSnapshot::max_entities) ctx.entities.erase_oldest();
    touch_locked(record);
    return ctx;
}

void SessionStore::set_sentiment(const std::string &session_id, double sentiment) {
    std::lock_guard lock(mutex_);
    auto &record = at_locked(session_id);
    record.last_sentiment = std::clamp(sentiment, -1.0, 1.0);
    touch_locked(record);
}

int SessionStore::increment_oos(const std::string &session_id) {
    std::lock_guard lock(mutex_);
    auto &record = at_locked(session_id);
    ++record.consecutive_oos;
    touch_locked(record);
    return record.consecutive_oos;
}

void SessionStore::reset_oos(const std::string &session_id) {
    std::lock_guard lock(mutex_);
    auto &record = at_locked(session_id);
    record.consecutive_oos = 0;
    touch_locked(record);
}

void SessionStore::hand_over(const std::string &session_id, const std::string &human_agent_id) {
    std::lock_guard lock(mutex_);
    auto &record = live_locked(session_id);
    record.status = SessionStatus::handed_over;
    record.serving_agent_id = human_agent_id;
    touch_locked(record);
}

void SessionStore::close(const std::string &session_id) {
    std::lock_guard lock(mutex_);
    auto &record = at_locked(session_id);
    if (record.status == SessionStatus::closed) {
        throw Error(ErrorCode::session_not_active, "session already closed: " + session_id);
    }
    record.status = SessionStatus::closed;
    touch_locked(record);
}

std::vector<Json> SessionStore::drain_changes() {
    std::lock_guard lock(mutex_);
    std::vector<Json> out;
    for (const auto &id : dirty_) out.push_back(Json(sessions_.at(id)));
    dirty_.clear();
    return out;
}

void SessionStore::restore(const Json &record) {
    auto session = record.get<SessionRecord>();
    std::lock_guard lock(mutex_);
    ids_.bump_past(numeric_suffix(session.session_id));
    sessions_[session.session_id] = std::move(session);
}

// ------------------------------------------------------------- query cache

QueryCache::QueryCache(const registry::Registry &registry, const SessionStore &sessions)
    : registry_(registry), sessions_(sessions) {}

void QueryCache::log_query(QueryCacheEntry entry) {
    const auto session = sessions_.get(entry.session_id);
    if (registry_.has_app(session.app_id) &&
        registry_.route_app(session.app_id).data_classification == registry::DataClassification::sensitive) {
        entry.utterance_stored = orchestrate::pii_redact(entry.utterance_stored).redacted;
    }
    std::lock_guard lock(mutex_);
    entries_.push_back(std::move(entry));
}

std::vector<QueryCacheEntry> QueryCache::get_queries(std::string_view session_id) const {
    std::lock_guard lock(mutex_);
    std::vector<QueryCacheEntry> out;
    for (const auto &e : entries_) {
        if (e.session_id == session_id) out.push_back(e);
    }
    return out;
}

std::vector<QueryCacheEntry> QueryCache::all() const {
    std::lock_guard lock(mutex_);
    return entries_;
}

std::vector<Json> QueryCache::drain_changes() {
    std::lock_guard lock(mutex_);
    std::vector<Json> out;
    for (; written_ < entries_.size(); ++written_) out.push_back(Json(entries_[written_]));
    return out;
}

void QueryCache::restore(const Json &record) {
    std::lock_guard lock(mutex_);
    entries_.push_back(record.get<QueryCacheEntry>());
    written_ = entries_.size();
}

// ---------------------------------------------------------------- feedback

FeedbackStore::FeedbackStore(registry::Registry &registry) : registry_(registry) {}

Rating FeedbackStore::record_feedback(const FeedbackRecord &record) {
    if (record.score < 1 || record.score > 5) {
        throw Error(ErrorCode::invalid_score, "score must be 1-5, got " + std::to_string(record.score));
    }
    if (!registry_.has_agent(record.agent_id)) throw Error(ErrorCode::unknown_agent, "unknown agent: " + record.agent_id);
    Rating band;
    {
        std::lock_guard lock(mutex_);
        records_.push_back(record);
        auto &tally = tallies_[record.agent_id];
        tally.sum += record.score;
        ++tally.count;
        dirty_.insert(record.agent_id);
        band = rating_band(static_cast<double>(tally.sum) / static_cast<double>(tally.count), tally.count);
    }
    registry_.update_rating(record.agent_id, band);
    return band;
}

std::optional<RatingState> FeedbackStore::rating_state(std::string_view agent_id) const {
    std::lock_guard lock(mutex_);
    auto it = tallies_.find(agent_id);
    if (it == tallies_.end()) return std::nullopt;
    return RatingState{it->first, static_cast<double>(it->second.sum) / static_cast<double>(it->second.count),
                       it->second.count};
}

std::vector<RatingState> FeedbackStore::ratings() const {
    std::lock_guard lock(mutex_);
    std::vector<RatingState> out;
    for (const auto &[id, t] : tallies_) {
        out.push_back({id, static_cast<double>(t.sum) / static_cast<double>(t.count), t.count});
    }
    return out;
}

std::vector<FeedbackRecord> FeedbackStore::records() const {
    std::lock_guard lock(mutex_);
    return records_;
}

void FeedbackStore::sync_registry() const {
    for (const auto &state : ratings()) {
        if (registry_.has_agent(state.agent_id)) {
            registry_.update_rating(state.agent_id, rating_band(state.mean_score, state.sample_count));
        }
    }
}

std::vector<Json> FeedbackStore::drain_feedback_changes() {
    std::lock_guard lock(mutex_);
    std::vector<Json> out;
    for (; written_ < records_.size(); ++written_) out.push_back(Json(records_[written_]));
    return out;
}

std::vector<Json> FeedbackStore::drain_rating_changes() {
    std::lock_guard lock(mutex_);
    std::vector<Json> out;
    for (const auto &id : dirty_) {
        const auto &t = tallies_.at(id);
        out.push_back(Json(RatingState{id, static_cast<double>(t.sum) / static_cast<double>(t.count), t.count}));
    }
    dirty_.clear();
    return out;
}

void FeedbackStore::restore_feedback(const Json &record) {
    std::lock_guard lock(mutex_);
    records_.push_back(record.get<FeedbackRecord>());
    written_ = records_.size();
}

void FeedbackStore::restore_rating(const Json &record) {
    const auto state = record.get<RatingState>();
    std::lock_guard lock(mutex_);
    // Scores are integers, so the sum is recovered exactly from mean * count.
    tallies_[state.agent_id] = Tally{std::llround(state.mean_score * static_cast<double>(state.sample_count)),
                                     state.sample_count};
}

// ------------------------------------------------------------------- users

void UserStore::index_locked(const UserProfile &profile) {
    for (const auto &[channel, local] : profile.channel_identities) by_identity_[{channel, local}] = profile.user_id;
}

UserProfile UserStore::resolve_user(const std::string &channel_id, const std::string &channel_local_id) {
    std::lock_guard lock(mutex_);
    auto it = by_identity_.find({channel_id, channel_local_id});
    if (it != by_identity_.end()) return users_.at(it->second);
    UserProfile profile;
    profile.user_id = ids_.next();
    while (users_.count(profile.user_id)) profile.user_id = ids_.next();
    profile.channel_identities[channel_id] = channel_local_id;
    users_[profile.user_id] = profile;
    index_locked(profile);
    dirty_.insert(profile.user_id);
    return profile;
}

void UserStore::link_identity(const std::string &user_id, const std::string &channel_id,
                              const std::string &channel_local_id) {
    std::lock_guard lock(mutex_);
    auto &profile = users_[user_id];
    profile.user_id = user_id;
    profile.channel_identities[channel_id] = channel_local_id;
    index_locked(profile);
    dirty_.insert(user_id);
}

void UserStore::upsert(const UserProfile &profile) {
    std::lock_guard lock(mutex_);
    users_[profile.user_id] = profile;
    index_locked(profile);
    dirty_.insert(profile.user_id);
}

std::optional<UserProfile> UserStore::profile(std::string_view user_id) const {
    std::lock_guard lock(mutex_);
    auto it = users_.find(user_id);
    if (it == users_.end()) return std::nullopt;
    return it->second;
}

std::vector<UserProfile> UserStore::all() const {
    std::lock_guard lock(mutex_);
    std::vector<UserProfile> out;
    for (const auto &[id, p] : users_) out.push_back(p);
    return out;
}

std::vector<Json> UserStore::drain_changes() {
    std::lock_guard lock(mutex_);
    std::vector<Json> out;
    for (const auto &id : dirty_) out.push_back(Json(users_.at(id)));
    dirty_.clear();
    return out;
}

void UserStore::restore(const Json &record) {
    auto profile = record.get<UserProfile>();
    std::lock_guard lock(mutex_);
    ids_.bump_past(numeric_suffix(profile.user_id));
    index_locked(profile);
    users_[profile.user_id] = std::move(profile);
}

// ----------------------------------------------------------------- routing

RoutingStore::RoutingStore(const registry::Registry &registry) : registry_(registry) {}

void RoutingStore::set_rule(const RoutingRule &rule) {
    std::lock_guard lock(mutex_);
    rules_[rule.user_id] = rule;
    dirty_.insert(rule.user_id);
}

std::optional<RoutingRule> RoutingStore::routing_rule_for(std::string_view user_id) const {
    std::optional<RoutingRule> rule;
    {
        std::lock_guard lock(mutex_);
        auto it = rules_.find(user_id);
        if (it != rules_.end()) rule = it->second;
    }
    if (rule && !registry_.has_agent(rule->preferred_agent_id)) return std::nullopt;
    return rule;
}

std::vector<RoutingRule> RoutingStore::all() const {
    std::lock_guard lock(mutex_);
    std::vector<RoutingRule> out;
    for (const auto &[id, r] : rules_) out.push_back(r);
    return out;
}

std::vector<Json> RoutingStore::drain_changes() {
    std::lock_guard lock(mutex_);
    std::vector<Json> out;
    for (const auto &id : dirty_) out.push_back(Json(rules_.at(id)));
    dirty_.clear();
    return out;
}

void RoutingStore::restore(const Json &record) {
    auto rule = record.get<RoutingRule>();
    std::lock_guard lock(mutex_);
    rules_[rule.user_id] = std::move(rule);
}

// ------------------------------------------------------------- persistence

Stores::Stores(registry::Registry &registry, LogicalClock &clock)
    : sessions(registry, clock), queries(registry, sessions), feedback(registry), users(), routing(registry) {}

namespace {

void append_lines(const std::filesystem::path &file, const std::vector<Json> &records) {
    std::ofstream out(file, std::ios::app | std::ios::binary);
    if (!out) throw Error(ErrorCode::invalid_argument, "cannot write " + file.string());
    for (const auto &r : records) out << r.dump() << '\n';
}

template <typename Apply>
void replay(const std::filesystem::path &file, Apply apply) {
    std::ifstream in(file, std::ios::binary);
    if (!in) return;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            apply(Json::parse(line));
        } catch (const Json::exception &e) {
            throw Error(ErrorCode::parse_error, file.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

}  // namespace

void Stores::snapshot(const std::filesystem::path &dir) {
    std::filesystem::create_directories(dir);
    append_lines(dir / "sessions.jsonl", sessions.drain_changes());
    append_lines(dir / "query_cache.jsonl", queries.drain_changes());
    append_lines(dir / "feedback.jsonl", feedback.drain_feedback_changes());
    append_lines(dir / "ratings.jsonl", feedback.drain_rating_changes());
    append_lines(dir / "users.jsonl", users.drain_changes());
    append_lines(dir / "routing.jsonl", routing.drain_changes());
}

void Stores::load(const std::filesystem::path &dir) {
    replay(dir / "sessions.jsonl", [&](const Json &j) { sessions.restore(j); });
    replay(dir / "query_cache.jsonl", [&](const Json &j) { queries.restore(j); });
    replay(dir / "feedback.jsonl", [&](const Json &j) { feedback.restore_feedback(j); });
    replay(dir / "ratings.jsonl", [&](const Json &j) { feedback.restore_rating(j); });
    replay(dir / "users.jsonl", [&](const Json &j) { users.restore(j); });
    replay(dir / "routing.jsonl", [&](const Json &j) { routing.restore(j); });
    feedback.sync_registry();
}

}  // namespace lpar::stores
