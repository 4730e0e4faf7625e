#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lpar/gateway/platform.hpp"

namespace lpar::gateway {

// One expectation attached to a transcript line.
//   field=value    exact match
//   field~text     field contains text
//   field!~text    field does not contain text
// Fields: agent_name, agent_id, reply, disposition, handover, handover_reason.
struct Expectation {
    enum class Op { equals, contains, not_contains };
    std::string field;
    Op op = Op::equals;
    std::string value;
};

struct TranscriptLine {
    std::size_t line_number = 0;
    std::string utterance;
    std::vector<Expectation> expectations;
};

// "utterance => exp ; exp". Blank lines and '#' comments are skipped.
// Throws ParseError naming the line.
std::vector<TranscriptLine> parse_transcript(std::istream &in);

// Field value of a turn as the transcript sees it.
std::string turn_field(const orchestrate::TurnResult &turn, std::string_view field);

// Empty when the expectation holds, else a description of the mismatch.
std::optional<std::string> check_expectation(const orchestrate::TurnResult &turn, const Expectation &e);

struct ScriptSummary {
    std::size_t turns = 0;
    std::size_t failed_assertions = 0;
};

// Replays the transcript on a fresh CLI conversation. Writes one JSON record
// per turn to `out` and a line per failed assertion to `err`.
ScriptSummary run_script(Platform &platform, const std::string &app_id, const std::vector<TranscriptLine> &lines,
                         std::ostream &out, std::ostream &err, const std::string &user = "script-user");

struct ReplOptions {
    std::string user = "cli-user";
    std::optional<std::filesystem::path> data_dir;  // snapshot target on :quit
};

// Line-oriented chat loop. Prints "«agent name» reply" per turn. Meta
// commands: ":trace" toggles the selection trace, ":feedback <agent> <1-5>",
// ":quit" snapshots (when a data dir is set) and returns 0.
int run_repl(Platform &platform, const std::string &app_id, std::istream &in, std::ostream &out,
             const ReplOptions &options = {});

}  // namespace lpar::gateway
