#include "lpar/common/types.hpp"

#include <algorithm>

namespace lpar {

std::string_view to_string(Disposition d) noexcept {
    switch (d) {
    case Disposition::in_scope: return "in_scope";
    case Disposition::out_of_scope: return "out_of_scope";
    case Disposition::handover_request: return "handover_request";
    }
    return "out_of_scope";
}

std::string_view to_string(Rating r) noexcept {
    switch (r) {
    case Rating::Beginner: return "Beginner";
    case Rating::Intermediate: return "Intermediate";
    case Rating::Professional: return "Professional";
    case Rating::Expert: return "Expert";
    }
    return "Beginner";
}

std::string_view to_string(SessionStatus s) noexcept {
    switch (s) {
    case SessionStatus::active: return "active";
    case SessionStatus::handed_over: return "handed_over";
    case SessionStatus::closed: return "closed";
    }
    return "active";
}

std::string_view to_string(Strategy s) noexcept {
    switch (s) {
    case Strategy::broadcast_only: return "broadcast_only";
    case Strategy::search_and_multicast: return "search_and_multicast";
    case Strategy::direct_to_bound: return "direct_to_bound";
    }
    return "broadcast_only";
}

std::string_view to_string(PolicyId p) noexcept {
    switch (p) {
    case PolicyId::highest_confidence: return "highest_confidence";
    case PolicyId::rating_weighted: return "rating_weighted";
    case PolicyId::fastest_eligible: return "fastest_eligible";
    }
    return "highest_confidence";
}

void EntityMap::set(std::string key, std::string value) {
    auto it = std::find_if(items_.begin(), items_.end(),
                           [&](const value_type &kv) { return kv.first == key; });
    if (it != items_.end()) items_.erase(it);
    items_.emplace_back(std::move(key), std::move(value));
}

std::optional<std::string> EntityMap::get(std::string_view key) const {
    for (const auto &[k, v] : items_) {
        if (k == key) return v;
    }
    return std::nullopt;
}

void EntityMap::erase_oldest() {
    if (!items_.empty()) items_.erase(items_.begin());
}

}  // namespace lpar
