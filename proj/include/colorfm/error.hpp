#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace colorfm {

enum class ErrorCode {
  Syntax,
  EmptyInput,
  UnknownLabel,
  UnknownBox,
  SameLabel,
  FreshLabelCollision,
  InvalidModel,
  ModelMismatch,
  InvalidDecision,
  NothingToUndo,
  VoidModel,
  CapExceeded,
  DnfTooLarge,
  ReplayDivergence,
  Io,
};

std::string_view error_code_name(ErrorCode code);

/// Domain error. `details` carries structured context (violations, labels)
/// for reporting layers that want more than the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::vector<std::string> details = {})
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  std::vector<std::string> details_;
};

struct SourcePos {
  std::size_t line = 1;
  std::size_t column = 1;
};

class SyntaxError : public Error {
 public:
  SyntaxError(SourcePos pos, const std::string& what)
      : Error(ErrorCode::Syntax, "line " + std::to_string(pos.line) + ", column " +
                                     std::to_string(pos.column) + ": " + what),
        pos_(pos),
        reason_(what) {}

  SourcePos position() const noexcept { return pos_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  SourcePos pos_;
  std::string reason_;
};

}  // namespace colorfm
