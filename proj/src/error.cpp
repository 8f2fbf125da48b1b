#include "metrikos/error.hpp"

namespace metrikos {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_input: return "invalid input";
    case ErrorCode::infeasible: return "infeasible coordinates";
    case ErrorCode::no_convergence: return "no convergence";
    case ErrorCode::degenerate: return "degenerate configuration";
    case ErrorCode::division_by_zero: return "division by zero";
    case ErrorCode::evaluation_failure: return "evaluation failure";
    case ErrorCode::empty_locus: return "empty locus";
    case ErrorCode::parse_error: return "parse error";
    case ErrorCode::io_error: return "i/o error";
    case ErrorCode::internal: return "internal error";
  }
  return "unknown error";
}

}  // namespace metrikos
