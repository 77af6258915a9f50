#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace towscan {

enum class ErrorCode {
  InvalidArgument,
  Io,
  BadMagic,
  DimensionMismatch,
  TruncatedPayload,
  FewerLinesThanExpected,
  TooFewEdges,
  WindowTooLarge,
  EmptyClass,
  UnknownTow,
  SignalTooShort,
  NonFinite,
  ArchitectureMismatch,
  ChecksumMismatch,
  InvalidSpec,
  Config,
  Format,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception type thrown by every towscan module. The code is stable and
/// machine-readable; the CLI reports it in its error JSON.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace towscan
