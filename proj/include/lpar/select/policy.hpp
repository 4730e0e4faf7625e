#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>

#include "lpar/common/types.hpp"

namespace lpar::select {

using RatingMap = std::map<std::string, Rating, std::less<>>;

// Multiplier used by rating_weighted.
double rating_weight(Rating rating) noexcept;

// Minimum confidence for fastest_eligible.
inline constexpr double fastest_eligible_min_confidence = 0.5;

// Picks one winner among in-scope responses; other dispositions are ignored.
// Ratings are looked up by AgentResponse::effective_agent(), missing entries
// count as Beginner.
//
//   highest_confidence  max confidence; ties -> higher rating -> lower latency
//                       -> ascending agent id
//   rating_weighted     max confidence * rating_weight; ties as above
//   fastest_eligible    min latency among confidence >= 0.5, ties broken by
//                       the highest_confidence order; when nobody is eligible
//                       it falls back to highest_confidence
std::optional<AgentResponse> apply_policy(PolicyId policy, std::span<const AgentResponse> candidates,
                                          const RatingMap &ratings);

}  // namespace lpar::select
