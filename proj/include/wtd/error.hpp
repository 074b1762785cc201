#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wtd {

enum class ErrorKind {
  OutOfDomain,
  SingularTrajectory,
  NumericalDegeneracy,
  Timeout,
  InsufficientData,
  Reducible,
  NonPositiveLength,
  OutOfRange,
  ConnectionEncountered,
  Degenerate,
  GridMismatch,
  Config,
};

std::string_view to_string(ErrorKind kind);

/// Exception type used across the library; the kind drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::SingularTrajectory: return "SingularTrajectory";
    case ErrorKind::NumericalDegeneracy: return "NumericalDegeneracy";
    case ErrorKind::Timeout: return "Timeout";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::Reducible: return "Reducible";
    case ErrorKind::NonPositiveLength: return "NonPositiveLength";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::ConnectionEncountered: return "ConnectionEncountered";
    case ErrorKind::Degenerate: return "Degenerate";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::Config: return "Config";
  }
  return "Unknown";
}

}  // namespace wtd
