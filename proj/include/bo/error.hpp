#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bo {

enum class ErrorKind {
  InvalidArgument,
  NotMeanZero,
  NonFinite,
  DurationMismatch,
  CutoffOverflow,
  NotInSpan,
  BudgetExhausted,
  RecursionLimit,
  Parse,
};

std::string_view to_string(ErrorKind kind);

/// Base exception for every failure raised by the library; `kind()` is the
/// machine-readable tag the CLI reports.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace bo
