#include "nlreg/error.hpp"

namespace nlreg {

std::string_view category_name(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::InvalidInput: return "invalid_input";
    case ErrorCategory::DegenerateData: return "degenerate_data";
    case ErrorCategory::NumericalFailure: return "numerical_failure";
    case ErrorCategory::ParseError: return "parse_error";
    case ErrorCategory::UndefinedMetric: return "undefined_metric";
    case ErrorCategory::ShapeMismatch: return "shape_mismatch";
    case ErrorCategory::Io: return "io_error";
  }
  return "unknown";
}

}  // namespace nlreg
