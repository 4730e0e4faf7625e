#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace lpar::orchestrate {

enum class PiiKind { email, card, phone };

std::string_view to_string(PiiKind kind) noexcept;

struct Redaction {
    std::string redacted;
    std::vector<PiiKind> findings;  // in text order
};

// Luhn checksum over the digits of `digits` (non-digits ignored).
bool luhn_valid(std::string_view digits);

// Emails become "[REDACTED:email]". Runs of digits joined by spaces, dashes
// or parens become "[REDACTED:card]" when they hold 13-19 digits and pass
// Luhn, otherwise "[REDACTED:phone]" when they hold 7-19 digits. Idempotent.
Redaction pii_redact(std::string_view text);

struct ProfanityResult {
    std::string clean_text;
    bool flagged = false;
};

struct Lexicons {
    std::set<std::string> positive;
    std::set<std::string> negative;
    std::set<std::string> profanity;

    static Lexicons defaults();
};

// One entry per line; blank lines and lines starting with '#' are skipped.
std::set<std::string> load_word_list(const std::filesystem::path &path);

ProfanityResult profanity_filter(std::string_view text, const std::set<std::string> &words);

// (pos - neg) / max(1, pos + neg) over token occurrences.
double sentiment_score(std::string_view text, const Lexicons &lexicons);

}  // namespace lpar::orchestrate
