#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace concord {

enum class ErrorCode {
  EmptyCloud,
  InvalidCoordinate,
  InvalidThreshold,
  InsufficientViews,
  PredictionsAbsent,
  DegenerateSplit,
  InsufficientCorpus,
  InvalidShape,
  ShapeMismatch,
  InvalidArgument,
  ConfigError,
  IoError,
  Divergence,
  NothingToReport,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above; the
// message names the code first so CLI output stays greppable.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(compose(code, detail)), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  static std::string compose(ErrorCode code, const std::string& detail) {
    std::string msg(to_string(code));
    if (!detail.empty()) {
      msg += ": ";
      msg += detail;
    }
    return msg;
  }

  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyCloud: return "empty cloud";
    case ErrorCode::InvalidCoordinate: return "invalid coordinate";
    case ErrorCode::InvalidThreshold: return "invalid threshold";
    case ErrorCode::InsufficientViews: return "insufficient views";
    case ErrorCode::PredictionsAbsent: return "predictions absent";
    case ErrorCode::DegenerateSplit: return "degenerate split";
    case ErrorCode::InsufficientCorpus: return "insufficient corpus";
    case ErrorCode::InvalidShape: return "invalid shape";
    case ErrorCode::ShapeMismatch: return "shape mismatch";
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::ConfigError: return "config error";
    case ErrorCode::IoError: return "io error";
    case ErrorCode::Divergence: return "divergence";
    case ErrorCode::NothingToReport: return "nothing to report";
  }
  return "unknown error";
}

}  // namespace concord
