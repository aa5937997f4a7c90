#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tilefreq {

enum class ErrorKind {
  ReducibleMinPoly,
  AmbiguousRootInterval,
  RootNotGreaterThanOne,
  DegreeTooLarge,
  InvalidSystem,
  Parse,
  BallNotCovered,
  TileNotInHost,
  BoundaryTile,
  WindowTooSmall,
  BudgetExceeded,
  EigenvalueMismatch,
  NoSeedFound,
  NotStabilized,
  DeterminismFailure,
  NonPrimitiveCollared,
  RadiusTooSmall,
  IncompleteCode,
  MarginTooSmall,
  PrecisionExhausted,
  EmptyIntersection,
};

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::ReducibleMinPoly: return "ReducibleMinPoly";
    case ErrorKind::AmbiguousRootInterval: return "AmbiguousRootInterval";
    case ErrorKind::RootNotGreaterThanOne: return "RootNotGreaterThanOne";
    case ErrorKind::DegreeTooLarge: return "DegreeTooLarge";
    case ErrorKind::InvalidSystem: return "InvalidSystem";
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::BallNotCovered: return "BallNotCovered";
    case ErrorKind::TileNotInHost: return "TileNotInHost";
    case ErrorKind::BoundaryTile: return "BoundaryTile";
    case ErrorKind::WindowTooSmall: return "WindowTooSmall";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::EigenvalueMismatch: return "EigenvalueMismatch";
    case ErrorKind::NoSeedFound: return "NoSeedFound";
    case ErrorKind::NotStabilized: return "NotStabilized";
    case ErrorKind::DeterminismFailure: return "DeterminismFailure";
    case ErrorKind::NonPrimitiveCollared: return "NonPrimitiveCollared";
    case ErrorKind::RadiusTooSmall: return "RadiusTooSmall";
    case ErrorKind::IncompleteCode: return "IncompleteCode";
    case ErrorKind::MarginTooSmall: return "MarginTooSmall";
    case ErrorKind::PrecisionExhausted: return "PrecisionExhausted";
    case ErrorKind::EmptyIntersection: return "EmptyIntersection";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a kind so callers (and the
/// CLI exit-code mapping) can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace tilefreq
