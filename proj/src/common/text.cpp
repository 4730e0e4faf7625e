#include "lpar/common/text.hpp"

namespace lpar {

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char raw : text) {
        char c = raw;
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
            current.push_back(c);
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::string normalize_phrase(std::string_view text) {
    std::string out;
    for (const auto &tok : tokenize(text)) {
        if (!out.empty()) out.push_back(' ');
        out += tok;
    }
    return out;
}

std::string trim(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = text.find_last_not_of(" \t\r\n");
    return std::string(text.substr(first, last - first + 1));
}

bool contains_phrase(std::string_view text, std::string_view phrase) {
    const auto needle = normalize_phrase(phrase);
    if (needle.empty()) return false;
    const auto hay = " " + normalize_phrase(text) + " ";
    return hay.find(" " + needle + " ") != std::string::npos;
}

}  // namespace lpar
