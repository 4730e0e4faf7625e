#include "lpar/gateway/channels.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "lpar/common/error.hpp"
#include "lpar/common/text.hpp"

namespace lpar::gateway {

namespace {

Expectation parse_expectation(const std::string &raw, std::size_t line_number) {
    Expectation e;
    std::size_t pos = raw.find("!~");
    std::size_t width = 2;
    if (pos != std::string::npos) {
        e.op = Expectation::Op::not_contains;
    } else if ((pos = raw.find('~')) != std::string::npos) {
        e.op = Expectation::Op::contains;
        width = 1;
    } else if ((pos = raw.find('=')) != std::string::npos) {
        e.op = Expectation::Op::equals;
        width = 1;
    } else {
        throw Error(ErrorCode::parse_error, "line " + std::to_string(line_number) + ": bad expectation '" + raw + "'");
    }
    e.field = trim(raw.substr(0, pos));
    e.value = trim(raw.substr(pos + width));
    static const std::vector<std::string> fields = {"agent_name", "agent_id",    "reply",
                                                    "disposition", "handover", "handover_reason"};
    if (std::find(fields.begin(), fields.end(), e.field) == fields.end()) {
        throw Error(ErrorCode::parse_error, "line " + std::to_string(line_number) + ": unknown field '" + e.field + "'");
    }
    return e;
}

std::string describe(const Expectation &e) {
    const char *op = e.op == Expectation::Op::equals ? "=" : e.op == Expectation::Op::contains ? "~" : "!~";
    return e.field + op + e.value;
}

}  // namespace

std::vector<TranscriptLine> parse_transcript(std::istream &in) {
    std::vector<TranscriptLine> lines;
    std::string raw;
    std::size_t number = 0;
    while (std::getline(in, raw)) {
        ++number;
        const auto text = trim(raw);
        if (text.empty() || text.front() == '#') continue;

        TranscriptLine line;
        line.line_number = number;
        const auto arrow = text.find("=>");
        line.utterance = trim(text.substr(0, arrow));
        if (line.utterance.empty()) {
            throw Error(ErrorCode::parse_error, "line " + std::to_string(number) + ": empty utterance");
        }
        if (arrow != std::string::npos) {
            std::stringstream rest(text.substr(arrow + 2));
            std::string part;
            while (std::getline(rest, part, ';')) {
                if (!trim(part).empty()) line.expectations.push_back(parse_expectation(part, number));
            }
        }
        lines.push_back(std::move(line));
    }
    return lines;
}

std::string turn_field(const orchestrate::TurnResult &turn, std::string_view field) {
    if (field == "agent_name") return turn.agent_name;
    if (field == "agent_id") return turn.agent_id;
    if (field == "reply") return turn.reply_text;
    if (field == "disposition") return std::string(to_string(turn.disposition));
    if (field == "handover") return turn.handover ? "true" : "false";
    if (field == "handover_reason") return turn.handover_reason.value_or("");
    return {};
}

std::optional<std::string> check_expectation(const orchestrate::TurnResult &turn, const Expectation &e) {
    const auto actual = turn_field(turn, e.field);
    bool ok = false;
    switch (e.op) {
    case Expectation::Op::equals: ok = actual == e.value; break;
    case Expectation::Op::contains: ok = actual.find(e.value) != std::string::npos; break;
    case Expectation::Op::not_contains: ok = actual.find(e.value) == std::string::npos; break;
    }
    if (ok) return std::nullopt;
    return describe(e) + " (actual: \"" + actual + "\")";
}

ScriptSummary run_script(Platform &platform, const std::string &app_id, const std::vector<TranscriptLine> &lines,
                         std::ostream &out, std::ostream &err, const std::string &user) {
    ScriptSummary summary;
    const auto conversation = platform.start_conversation(app_id, "cli", user);
    for (const auto &line : lines) {
        const auto turn = platform.send(conversation.session_id, line.utterance);
        ++summary.turns;

        Json failures = Json::array();
        for (const auto &e : line.expectations) {
            if (auto failure = check_expectation(turn, e)) {
                ++summary.failed_assertions;
                failures.push_back(*failure);
                err << "line " << line.line_number << ": " << *failure << "\n";
            }
        }

        Json record{{"turn", summary.turns}, {"session_id", conversation.session_id}, {"utterance", line.utterance}};
        const Json fields = turn;
        for (const auto &[k, v] : fields.items()) record[k] = v;
        record["failed"] = failures;
        out << record.dump() << "\n";
    }
    return summary;
}

int run_repl(Platform &platform, const std::string &app_id, std::istream &in, std::ostream &out,
             const ReplOptions &options) {
    const auto conversation = platform.start_conversation(app_id, "cli", options.user);
    out << "«LPar» " << conversation.greeting << "\n";
    bool show_trace = false;

    std::string raw;
    while (std::getline(in, raw)) {
        const auto line = trim(raw);
        if (line.empty()) continue;

        if (line.front() == ':') {
            std::istringstream words(line);
            std::string command;
            words >> command;
            if (command == ":quit") break;
            if (command == ":trace") {
                show_trace = !show_trace;
                out << "trace " << (show_trace ? "on" : "off") << "\n";
                continue;
            }
            if (command == ":feedback") {
                std::string agent_id;
                int score = 0;
                if (!(words >> agent_id >> score)) {
                    out << "usage: :feedback <agent_id> <1-5>\n";
                    continue;
                }
                try {
                    const auto rating = platform.record_feedback({conversation.session_id, agent_id, score, ""});
                    out << "feedback recorded; " << agent_id << " is rated " << to_string(rating) << "\n";
                } catch (const Error &e) {
                    out << "error " << to_string(e.code()) << ": " << e.what() << "\n";
                }
                continue;
            }
            out << "commands: :trace | :feedback <agent_id> <1-5> | :quit\n";
            continue;
        }

        try {
            const auto turn = platform.send(conversation.session_id, line);
            out << "«" << (turn.agent_name.empty() ? "LPar" : turn.agent_name) << "» " << turn.reply_text << "\n";
            if (turn.handover) out << "-- handed over to a human (" << turn.handover_reason.value_or("") << ")\n";
            if (show_trace) {
                for (const auto &t : turn.trace) {
                    out << "   " << t.agent_id << " " << to_string(t.disposition) << " confidence=" << std::fixed
                        << std::setprecision(3) << t.confidence << " latency=" << std::setprecision(0) << t.latency_ms
                        << "ms";
                    if (t.served_by) out << " via " << *t.served_by;
                    out << "\n";
                    out.unsetf(std::ios::floatfield);
                }
            }
        } catch (const Error &e) {
            out << "error " << to_string(e.code()) << ": " << e.what() << "\n";
        }
    }

    if (options.data_dir) platform.snapshot(*options.data_dir);
    return 0;
}

}  // namespace lpar::gateway
