#include "lpar/agents/kit.hpp"

#include <algorithm>

#include "lpar/agents/goal.hpp"
#include "lpar/common/error.hpp"

namespace lpar::agents {

FaqPair FaqPair::make(std::string question, std::string answer) {
    auto embedding = embed::embed_text(question);
    return {std::move(question), std::move(answer), std::move(embedding)};
}

SearchDocument SearchDocument::make(std::string title, std::string body) {
    auto te = embed::embed_text(title);
    auto be = embed::embed_text(body);
    return {std::move(title), std::move(body), std::move(te), std::move(be)};
}

AgentResponse faq_agent_answer(const std::vector<FaqPair> &pairs, std::string_view utterance, double threshold) {
    if (pairs.empty()) throw Error(ErrorCode::empty_corpus, "FAQ agent has no question/answer pairs");
    const auto query = embed::embed_text(utterance);

    const FaqPair *best = nullptr;
    double best_sim = -2.0;
    for (const auto &pair : pairs) {
        const double sim = embed::cosine(query, pair.embedding);
        if (sim > best_sim) {
            best_sim = sim;
            best = &pair;
        }
    }

    AgentResponse r;
    if (best_sim < threshold) return r;
    r.disposition = Disposition::in_scope;
    r.confidence = best_sim;
    r.intent = "faq";
    r.reply_text = best->answer;
    return r;
}

AgentResponse search_agent_answer(const std::vector<SearchDocument> &corpus, std::string_view utterance, double floor,
                                  double damping) {
    if (corpus.empty()) throw Error(ErrorCode::empty_corpus, "search agent has an empty corpus");
    const auto query = embed::embed_text(utterance);

    const SearchDocument *best = nullptr;
    double best_sim = -2.0;
    for (const auto &doc : corpus) {
        const double sim = std::max(embed::cosine(query, doc.title_embedding), embed::cosine(query, doc.body_embedding));
        if (sim > best_sim) {
            best_sim = sim;
            best = &doc;
        }
    }

    AgentResponse r;
    if (best_sim < floor) return r;
    r.disposition = Disposition::in_scope;
    r.confidence = damping * best_sim;
    r.intent = "search";
    r.reply_text = best->title + ": " + best->body;
    return r;
}

FaqAgent::FaqAgent(std::string name, std::string description, std::vector<FaqPair> pairs, double threshold)
    : name_(std::move(name)), description_(std::move(description)), pairs_(std::move(pairs)), threshold_(threshold) {
    if (pairs_.empty()) throw Error(ErrorCode::empty_corpus, "FAQ agent " + name_ + " has no pairs");
}

ScoredAnswer FaqAgent::ask(std::string_view question) const {
    if (is_identify_request(question)) {
        return {true, identify_confidence, "I am the " + name_ + ". " + description_, identify_intent};
    }
    const auto r = faq_agent_answer(pairs_, question, threshold_);
    if (r.disposition != Disposition::in_scope) return {};
    return {true, r.confidence, r.reply_text, "faq"};
}

SearchAgent::SearchAgent(std::string name, std::string description, std::vector<SearchDocument> corpus, double floor,
                         double damping)
    : name_(std::move(name)),
      description_(std::move(description)),
      corpus_(std::move(corpus)),
      floor_(floor),
      damping_(damping) {
    if (corpus_.empty()) throw Error(ErrorCode::empty_corpus, "search agent " + name_ + " has an empty corpus");
}

ScoredAnswer SearchAgent::ask(std::string_view question) const {
    if (is_identify_request(question)) {
        return {true, identify_confidence, "I am the " + name_ + ". " + description_, identify_intent};
    }
    const auto r = search_agent_answer(corpus_, question, floor_, damping_);
    if (r.disposition != Disposition::in_scope) return {};
    return {true, r.confidence, r.reply_text, "search"};
}

HumanConnectAgent::HumanConnectAgent(std::string name, std::string description)
    : name_(std::move(name)), description_(std::move(description)) {}

Json HumanConnectAgent::dialog(const Json &request) const {
    if (!request.value("handed_over", false)) return Json{{"status", "not_handled"}};
    const auto text = request.value("text", std::string{});
    if (is_identify_request(text)) {
        return Json{{"status", "handled"},
                    {"score", 1.0},
                    {"intent", identify_intent},
                    {"speech", "I am the " + name_ + ". " + description_}};
    }
    return Json{{"status", "handled"},
                {"score", 1.0},
                {"intent", "live_chat"},
                {"speech", "A colleague from our team has your message and will reply here shortly."}};
}

}  // namespace lpar::agents
