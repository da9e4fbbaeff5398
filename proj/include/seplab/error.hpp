#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace seplab {

enum class ErrorKind {
  NonConvergence,
  NoBracket,
  SingularitySpacing,
  DimensionTooLarge,
  RejectionStall,
  BadPlateau,
  ZeroNetwork,
  DimensionMismatch,
  DegenerateTheta,
  ImaginaryResidual,
  ConfigInvalid,
  IoFailure,
};

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::NoBracket: return "NoBracket";
    case ErrorKind::SingularitySpacing: return "SingularitySpacing";
    case ErrorKind::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorKind::RejectionStall: return "RejectionStall";
    case ErrorKind::BadPlateau: return "BadPlateau";
    case ErrorKind::ZeroNetwork: return "ZeroNetwork";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DegenerateTheta: return "DegenerateTheta";
    case ErrorKind::ImaginaryResidual: return "ImaginaryResidual";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace seplab
