#include "lpar/common/error.hpp"

namespace lpar {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::duplicate_topic: return "duplicate_topic";
    case ErrorCode::unknown_topic: return "unknown_topic";
    case ErrorCode::topic_mismatch: return "topic_mismatch";
    case ErrorCode::not_multicast: return "not_multicast";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::duplicate_app: return "duplicate_app";
    case ErrorCode::unknown_app: return "unknown_app";
    case ErrorCode::invalid_descriptor: return "invalid_descriptor";
    case ErrorCode::duplicate_agent: return "duplicate_agent";
    case ErrorCode::unknown_agent: return "unknown_agent";
    case ErrorCode::unknown_pod: return "unknown_pod";
    case ErrorCode::cyclic_pod: return "cyclic_pod";
    case ErrorCode::unknown_session: return "unknown_session";
    case ErrorCode::unsupported_channel: return "unsupported_channel";
    case ErrorCode::session_not_active: return "session_not_active";
    case ErrorCode::session_closed: return "session_closed";
    case ErrorCode::invalid_score: return "invalid_score";
    case ErrorCode::unknown_scope: return "unknown_scope";
    case ErrorCode::unknown_policy: return "unknown_policy";
    case ErrorCode::empty_corpus: return "empty_corpus";
    case ErrorCode::adapter_timeout: return "adapter_timeout";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::validation_error: return "validation_error";
    case ErrorCode::bind_error: return "bind_error";
    case ErrorCode::invalid_argument: return "invalid_argument";
    }
    return "unknown";
}

}  // namespace lpar
