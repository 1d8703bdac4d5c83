#pragma once

#include <stdexcept>
#include <string>

namespace adjwalk {

enum class ErrorKind {
  Domain,
  NoOverlap,
  DegenerateEqual,
  RejectionBudgetExceeded,
  RegimeViolation,
  StepTooLarge,
  InsufficientGrid,
  InconsistentWindow,
  IllConditioned,
  Usage,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Throws Error(Domain) unless cond holds.
inline void require(bool cond, const std::string& message) {
  if (!cond) throw Error(ErrorKind::Domain, message);
}

}  // namespace adjwalk
