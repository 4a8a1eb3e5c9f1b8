#include "fallacyscope/error.hpp"

namespace fallacyscope {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyInput: return "empty_input";
    case ErrorCode::AnchorMismatch: return "anchor_mismatch";
    case ErrorCode::Arity: return "arity";
    case ErrorCode::NoCard: return "no_card";
    case ErrorCode::Unparseable: return "unparseable";
    case ErrorCode::Deadline: return "deadline";
    case ErrorCode::Unavailable: return "unavailable";
    case ErrorCode::Config: return "config";
    case ErrorCode::AnchorFailure: return "anchor_failure";
    case ErrorCode::NoFindings: return "no_findings";
    case ErrorCode::Upstream: return "upstream";
    case ErrorCode::Fetch: return "fetch";
    case ErrorCode::UnknownHighlight: return "unknown_highlight";
    case ErrorCode::UnknownMessage: return "unknown_message";
    case ErrorCode::UnknownPage: return "unknown_page";
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Storage: return "storage";
    case ErrorCode::EmptyResults: return "empty_results";
    case ErrorCode::FailureRateExceeded: return "failure_rate_exceeded";
  }
  return "unknown";
}

}  // namespace fallacyscope
