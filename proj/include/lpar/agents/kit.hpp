#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "lpar/common/json.hpp"
#include "lpar/common/types.hpp"
#include "lpar/embed/embedding.hpp"

namespace lpar::agents {

inline constexpr double default_faq_threshold = 0.35;
inline constexpr double default_search_floor = 0.05;
inline constexpr double default_search_damping = 0.5;

struct FaqPair {
    std::string question;
    std::string answer;
    embed::Embedding embedding;  // of the question

    static FaqPair make(std::string question, std::string answer);
};

// Nearest stored question by cosine. In scope with confidence = similarity
// when it reaches the threshold. Throws EmptyCorpus.
AgentResponse faq_agent_answer(const std::vector<FaqPair> &pairs, std::string_view utterance,
                               double threshold = default_faq_threshold);

struct SearchDocument {
    std::string title;
    std::string body;
    embed::Embedding title_embedding;
    embed::Embedding body_embedding;

    static SearchDocument make(std::string title, std::string body);
};

// Scores each document by max(cos(title), cos(body)); the best one answers
// with confidence = damping * similarity. Below the floor (on the raw
// similarity) the query is out of scope. Throws EmptyCorpus.
AgentResponse search_agent_answer(const std::vector<SearchDocument> &corpus, std::string_view utterance,
                                  double floor = default_search_floor, double damping = default_search_damping);

// Native reply shape of the retrieval-style vendor.
struct ScoredAnswer {
    bool found = false;
    double score = 0.0;
    std::string answer;
    std::string topic;
};

class FaqAgent {
public:
    FaqAgent(std::string name, std::string description, std::vector<FaqPair> pairs,
             double threshold = default_faq_threshold);

    ScoredAnswer ask(std::string_view question) const;

private:
    std::string name_;
    std::string description_;
    std::vector<FaqPair> pairs_;
    double threshold_;
};

class SearchAgent {
public:
    SearchAgent(std::string name, std::string description, std::vector<SearchDocument> corpus,
                double floor = default_search_floor, double damping = default_search_damping);

    ScoredAnswer ask(std::string_view question) const;

private:
    std::string name_;
    std::string description_;
    std::vector<SearchDocument> corpus_;
    double floor_;
    double damping_;
};

// Live-chat bridge. Takes every turn with confidence 1 once the session is
// handed over and declines everything before that, so it never wins a
// normal election. JSON dialog endpoint: {text, handed_over} ->
// {status, score, intent, speech}.
class HumanConnectAgent {
public:
    HumanConnectAgent(std::string name, std::string description);

    Json dialog(const Json &request) const;

private:
    std::string name_;
    std::string description_;
};

}  // namespace lpar::agents
