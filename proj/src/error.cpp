#include "navfuse/error.hpp"

namespace navfuse {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kDegenerateQuaternion: return "degenerate-quaternion";
    case ErrorCode::kNonFinite: return "non-finite";
    case ErrorCode::kUnobservableTilt: return "unobservable-tilt";
    case ErrorCode::kUnobservableHeading: return "unobservable-heading";
    case ErrorCode::kOrdering: return "ordering";
    case ErrorCode::kUndefinedBearing: return "undefined-bearing";
    case ErrorCode::kOutOfRange: return "out-of-range";
    case ErrorCode::kEncodeRange: return "encode-range";
    case ErrorCode::kFraming: return "framing";
    case ErrorCode::kTruncation: return "truncation";
    case ErrorCode::kCorruption: return "corruption";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kInvalidProfile: return "invalid-profile";
    case ErrorCode::kAlignment: return "alignment";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

Error Error::at_offset(ErrorCode code, std::size_t offset, const std::string& what) {
  Error e(code, what + " (byte offset " + std::to_string(offset) + ")");
  e.offset_ = offset;
  return e;
}

Error Error::at_line(ErrorCode code, std::size_t line, const std::string& what) {
  Error e(code, "line " + std::to_string(line) + ": " + what);
  e.line_ = line;
  return e;
}

}  // namespace navfuse
