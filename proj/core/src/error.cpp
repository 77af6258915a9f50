#include "towscan/error.hpp"

namespace towscan {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::FewerLinesThanExpected: return "FewerLinesThanExpected";
    case ErrorCode::TooFewEdges: return "TooFewEdges";
    case ErrorCode::WindowTooLarge: return "WindowTooLarge";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::UnknownTow: return "UnknownTow";
    case ErrorCode::SignalTooShort: return "SignalTooShort";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::ArchitectureMismatch: return "ArchitectureMismatch";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Format: return "Format";
  }
  return "Unknown";
}

}  // namespace towscan
