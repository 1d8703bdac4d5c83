#include "adjwalk/error.hpp"

namespace adjwalk {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Domain: return "DomainError";
    case ErrorKind::NoOverlap: return "NoOverlap";
    case ErrorKind::DegenerateEqual: return "DegenerateEqual";
    case ErrorKind::RejectionBudgetExceeded: return "RejectionBudgetExceeded";
    case ErrorKind::RegimeViolation: return "RegimeViolation";
    case ErrorKind::StepTooLarge: return "StepTooLarge";
    case ErrorKind::InsufficientGrid: return "InsufficientGrid";
    case ErrorKind::InconsistentWindow: return "InconsistentWindow";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::Usage: return "UsageError";
  }
  return "Error";
}

}  // namespace adjwalk
