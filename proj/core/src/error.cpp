#include "rfvqa/error.hpp"

namespace rfvqa {

std::string_view category_name(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::InvalidArgument: return "invalid-argument";
    case ErrorCategory::Config: return "config";
    case ErrorCategory::MissingArtifact: return "missing-artifact";
    case ErrorCategory::Transport: return "transport";
    case ErrorCategory::Auth: return "auth";
    case ErrorCategory::Data: return "data";
    case ErrorCategory::Io: return "io";
  }
  return "unknown";
}

}  // namespace rfvqa
