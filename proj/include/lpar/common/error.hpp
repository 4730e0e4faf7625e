#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lpar {

enum class ErrorCode {
    duplicate_topic,
    unknown_topic,
    topic_mismatch,
    not_multicast,
    dimension_mismatch,
    duplicate_app,
    unknown_app,
    invalid_descriptor,
    duplicate_agent,
    unknown_agent,
    unknown_pod,
    cyclic_pod,
    unknown_session,
    unsupported_channel,
    session_not_active,
    session_closed,
    invalid_score,
    unknown_scope,
    unknown_policy,
    empty_corpus,
    adapter_timeout,
    parse_error,
    validation_error,
    bind_error,
    invalid_argument,
};

// Machine-readable snake_case name, used verbatim as the API error code.
std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string &message)
        : std::runtime_error(message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace lpar
