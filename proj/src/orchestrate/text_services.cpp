#include "lpar/orchestrate/text_services.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>

#include "lpar/common/error.hpp"
#include "lpar/common/text.hpp"

namespace lpar::orchestrate {

std::string_view to_string(PiiKind kind) noexcept {
    switch (kind) {
    case PiiKind::email: return "email";
    case PiiKind::card: return "card";
    case PiiKind::phone: return "phone";
    }
    return "phone";
}

bool luhn_valid(std::string_view digits) {
    int sum = 0;
    int count = 0;
    bool double_it = false;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
        if (!std::isdigit(static_cast<unsigned char>(*it))) continue;
        int d = *it - '0';
        if (double_it) {
            d *= 2;
            if (d > 9) d -= 9;
        }
        sum += d;
        double_it = !double_it;
        ++count;
    }
    return count > 0 && sum % 10 == 0;
}

namespace {

struct Span {
    std::size_t begin;
    std::size_t end;
    PiiKind kind;
};

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_joiner(char c) { return c == ' ' || c == '-' || c == '(' || c == ')'; }

void find_emails(std::string_view text, std::vector<Span> &spans) {
    static const std::regex email(R"([A-Za-z0-9._%+\-]+@[A-Za-z0-9\-]+(\.[A-Za-z0-9\-]+)*\.[A-Za-z]{2,})");
    const std::string s(text);
    for (auto it = std::sregex_iterator(s.begin(), s.end(), email); it != std::sregex_iterator(); ++it) {
        const auto begin = static_cast<std::size_t>(it->position());
        spans.push_back({begin, begin + static_cast<std::size_t>(it->length()), PiiKind::email});
    }
}

void find_numbers(std::string_view text, std::size_t from, std::size_t to, std::vector<Span> &spans) {
    std::size_t i = from;
    while (i < to) {
        const char c = text[i];
        const bool opener = c == '+' || c == '(';
        if (!is_digit(c) && !(opener && i + 1 < to && (is_digit(text[i + 1]) || text[i + 1] == '('))) {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        while (j < to && (is_digit(text[j]) || is_joiner(text[j]))) ++j;
        // Trim trailing joiners, but keep a closing paren right after a digit.
        std::size_t end = j;
        while (end > i && !is_digit(text[end - 1]) && !(text[end - 1] == ')' && end - 1 > i && is_digit(text[end - 2]))) --end;
        const auto run = text.substr(i, end - i);
        const auto digits = std::count_if(run.begin(), run.end(), is_digit);
        if (digits >= 13 && digits <= 19 && luhn_valid(run)) {
            spans.push_back({i, end, PiiKind::card});
        } else if (digits >= 7 && digits <= 19) {
            spans.push_back({i, end, PiiKind::phone});
        }
        i = std::max(j, i + 1);
    }
}

}  // namespace

Redaction pii_redact(std::string_view text) {
    std::vector<Span> spans;
    find_emails(text, spans);
    std::sort(spans.begin(), spans.end(), [](const Span &a, const Span &b) { return a.begin < b.begin; });

    // Numbers are only searched between emails.
    std::vector<Span> numbers;
    std::size_t cursor = 0;
    for (const auto &email : spans) {
        find_numbers(text, cursor, email.begin, numbers);
        cursor = email.end;
    }
    find_numbers(text, cursor, text.size(), numbers);
    spans.insert(spans.end(), numbers.begin(), numbers.end());
    std::sort(spans.begin(), spans.end(), [](const Span &a, const Span &b) { return a.begin < b.begin; });

    Redaction out;
    cursor = 0;
    for (const auto &span : spans) {
        out.redacted.append(text.substr(cursor, span.begin - cursor));
        out.redacted += "[REDACTED:";
        out.redacted += to_string(span.kind);
        out.redacted += "]";
        out.findings.push_back(span.kind);
        cursor = span.end;
    }
    out.redacted.append(text.substr(cursor));
    return out;
}

Lexicons Lexicons::defaults() {
    Lexicons lex;
    lex.positive = {"good",      "great",     "excellent", "amazing",   "awesome",  "happy",     "pleased",
                    "thanks",    "thank",     "love",      "wonderful", "fantastic", "perfect",  "nice",
                    "helpful",   "brilliant", "superb",    "glad",      "delighted", "satisfied", "easy",
                    "quick",     "fast",      "best",      "cool",      "lovely",   "appreciate", "kind",
                    "friendly",  "smooth",    "clear",     "super",     "fine",     "enjoy",     "impressed",
                    "outstanding", "recommend", "grateful", "positive", "resolved"};
    lex.negative = {"bad",       "terrible",  "awful",     "horrible",  "worst",    "hate",      "angry",
                    "annoyed",   "annoying",  "useless",   "poor",      "slow",     "broken",    "frustrated",
                    "frustrating", "disappointed", "disappointing", "upset", "unhappy", "rubbish", "stupid",
                    "wrong",     "fail",      "failed",    "failure",   "problem",  "ridiculous", "pathetic",
                    "confusing", "confused",  "sad",       "never",     "worse",    "complaint", "unacceptable",
                    "nightmare", "scam",      "waste",     "hopeless",  "mad"};
    lex.profanity = {"damn", "hell", "crap", "shit", "fuck", "bloody", "bastard", "bitch", "arse", "piss"};
    return lex;
}

std::set<std::string> load_word_list(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::parse_error, "cannot read word list: " + path.string());
    std::set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        auto word = trim(line);
        if (word.empty() || word.front() == '#') continue;
        std::transform(word.begin(), word.end(), word.begin(), [](unsigned char c) { return std::tolower(c); });
        words.insert(std::move(word));
    }
    return words;
}

ProfanityResult profanity_filter(std::string_view text, const std::set<std::string> &words) {
    ProfanityResult out{std::string(text), false};
    std::size_t i = 0;
    while (i < out.clean_text.size()) {
        if (!std::isalnum(static_cast<unsigned char>(out.clean_text[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        std::string lowered;
        while (j < out.clean_text.size() && std::isalnum(static_cast<unsigned char>(out.clean_text[j]))) {
            lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(out.clean_text[j]))));
            ++j;
        }
        if (words.count(lowered)) {
            std::fill(out.clean_text.begin() + static_cast<std::ptrdiff_t>(i),
                      out.clean_text.begin() + static_cast<std::ptrdiff_t>(j), '*');
            out.flagged = true;
        }
        i = j;
    }
    return out;
}

double sentiment_score(std::string_view text, const Lexicons &lexicons) {
    int pos = 0;
    int neg = 0;
    for (const auto &token : tokenize(text)) {
        if (lexicons.positive.count(token)) ++pos;
        if (lexicons.negative.count(token)) ++neg;
    }
    return static_cast<double>(pos - neg) / static_cast<double>(std::max(1, pos + neg));
}

}  // namespace lpar::orchestrate
