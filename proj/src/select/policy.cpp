#include "lpar/select/policy.hpp"

#include <vector>

namespace lpar::select {

double rating_weight(Rating rating) noexcept {
    switch (rating) {
    case Rating::Beginner: return 0.25;
    case Rating::Intermediate: return 0.5;
    case Rating::Professional: return 0.75;
    case Rating::Expert: return 1.0;
    }
    return 0.25;
}

namespace {

Rating lookup(const RatingMap &ratings, const std::string &agent_id) {
    auto it = ratings.find(agent_id);
    return it == ratings.end() ? Rating::Beginner : it->second;
}

// True when `a` should win over `b` once the primary score is tied.
bool wins_tie(const AgentResponse &a, const AgentResponse &b, const RatingMap &ratings) {
    const auto ra = lookup(ratings, a.effective_agent());
    const auto rb = lookup(ratings, b.effective_agent());
    if (ra != rb) return ra > rb;
    if (a.latency_ms != b.latency_ms) return a.latency_ms < b.latency_ms;
    return a.effective_agent() < b.effective_agent();
}

template <typename Better>
std::optional<AgentResponse> best_of(const std::vector<const AgentResponse *> &pool, Better better) {
    const AgentResponse *best = nullptr;
    for (const auto *r : pool) {
        if (!best || better(*r, *best)) best = r;
    }
    if (!best) return std::nullopt;
    return *best;
}

}  // namespace

std::optional<AgentResponse> apply_policy(PolicyId policy, std::span<const AgentResponse> candidates,
                                          const RatingMap &ratings) {
    std::vector<const AgentResponse *> pool;
    for (const auto &r : candidates) {
        if (r.disposition == Disposition::in_scope) pool.push_back(&r);
    }

    auto by_confidence = [&](const AgentResponse &a, const AgentResponse &b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        return wins_tie(a, b, ratings);
    };

    switch (policy) {
    case PolicyId::highest_confidence:
        return best_of(pool, by_confidence);
    case PolicyId::rating_weighted:
        return best_of(pool, [&](const AgentResponse &a, const AgentResponse &b) {
            const double sa = a.confidence * rating_weight(lookup(ratings, a.effective_agent()));
            const double sb = b.confidence * rating_weight(lookup(ratings, b.effective_agent()));
            if (sa != sb) return sa > sb;
            return wins_tie(a, b, ratings);
        });
    case PolicyId::fastest_eligible: {
        std::vector<const AgentResponse *> eligible;
        for (const auto *r : pool) {
            if (r->confidence >= fastest_eligible_min_confidence) eligible.push_back(r);
        }
        if (eligible.empty()) return best_of(pool, by_confidence);
        return best_of(eligible, [&](const AgentResponse &a, const AgentResponse &b) {
            if (a.latency_ms != b.latency_ms) return a.latency_ms < b.latency_ms;
            return by_confidence(a, b);
        });
    }
    }
    return std::nullopt;
}

}  // namespace lpar::select
