#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lscae {

enum class ErrorKind {
  NonSymmetric,
  NonFinite,
  ShapeMismatch,
  DegenerateData,
  ZeroRowSum,
  EpochOutOfRange,
  ConfigInvalid,
  ParseError,
  IoError,
  RangeViolation,
  LengthMismatch,
  LabelsMissing,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` identifies the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool condition, ErrorKind kind, const char* message) {
  if (!condition) fail(kind, message);
}

}  // namespace lscae
