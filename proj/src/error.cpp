#include "bo/error.hpp"

namespace bo {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NotMeanZero: return "NotMeanZero";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::DurationMismatch: return "DurationMismatch";
    case ErrorKind::CutoffOverflow: return "CutoffOverflow";
    case ErrorKind::NotInSpan: return "NotInSpan";
    case ErrorKind::BudgetExhausted: return "BudgetExhausted";
    case ErrorKind::RecursionLimit: return "RecursionLimit";
    case ErrorKind::Parse: return "Parse";
  }
  return "Unknown";
}

}  // namespace bo
