#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fallacyscope {

enum class ErrorCode {
  EmptyInput,
  AnchorMismatch,
  Arity,
  NoCard,
  Unparseable,
  Deadline,
  Unavailable,
  Config,
  AnchorFailure,
  NoFindings,
  Upstream,
  Fetch,
  UnknownHighlight,
  UnknownMessage,
  UnknownPage,
  InvalidArgument,
  Storage,
  EmptyResults,
  FailureRateExceeded,
};

std::string_view to_string(ErrorCode code);

/// Typed failure shared by every module. `detail` carries auxiliary payload,
/// e.g. the raw completion text for Unparseable.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string detail = {})
      : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace fallacyscope
