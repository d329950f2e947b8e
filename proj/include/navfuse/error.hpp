#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace navfuse {

enum class ErrorCode {
  kInvalidArgument,
  kDegenerateQuaternion,
  kNonFinite,
  kUnobservableTilt,
  kUnobservableHeading,
  kOrdering,
  kUndefinedBearing,
  kOutOfRange,
  kEncodeRange,
  kFraming,
  kTruncation,
  kCorruption,
  kParse,
  kInvalidProfile,
  kAlignment,
  kIo,
};

const char* to_string(ErrorCode code);

// Single exception type for the library. Decoder errors carry the byte
// offset where the failure was detected; CSV errors carry a 1-based line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  static Error at_offset(ErrorCode code, std::size_t offset, const std::string& what);
  static Error at_line(ErrorCode code, std::size_t line, const std::string& what);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> offset() const noexcept { return offset_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> offset_;
  std::optional<std::size_t> line_;
};

}  // namespace navfuse
