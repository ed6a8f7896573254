#include "lscae/error.hpp"

namespace lscae {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonSymmetric: return "NonSymmetric";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::DegenerateData: return "DegenerateData";
    case ErrorKind::ZeroRowSum: return "ZeroRowSum";
    case ErrorKind::EpochOutOfRange: return "EpochOutOfRange";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::RangeViolation: return "RangeViolation";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::LabelsMissing: return "LabelsMissing";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace lscae
