#pragma once

#include <stdexcept>
#include <string>

namespace metrikos {

enum class ErrorCode {
  invalid_input = 1,
  infeasible,
  no_convergence,
  degenerate,
  division_by_zero,
  evaluation_failure,
  empty_locus,
  parse_error,
  io_error,
  internal,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace metrikos
