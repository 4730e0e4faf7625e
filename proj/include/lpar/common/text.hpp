#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lpar {

// Lowercase, map every character outside [a-z0-9] to a separator, split.
std::vector<std::string> tokenize(std::string_view text);

// Tokens re-joined with single spaces, e.g. "Talk to a HUMAN!" -> "talk to a human".
std::string normalize_phrase(std::string_view text);

std::string trim(std::string_view text);

// True when the token sequence of `phrase` occurs contiguously in `text`.
bool contains_phrase(std::string_view text, std::string_view phrase);

}  // namespace lpar
