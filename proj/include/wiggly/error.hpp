#pragma once

#include <stdexcept>
#include <string>

namespace wiggly {

enum class ErrorCode {
  invalid_input,
  non_coercive,
  monotonicity_violation,
  budget_exceeded,
  hypothesis_violated,
  not_found,
  quadrature_singularity,
  pinned,
  well_escape,
  io,
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

// Thrown when an iterative budget runs out; carries the best estimate so far.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& what, double best_estimate, double error_bound,
                 long long iterations)
      : Error(ErrorCode::budget_exceeded, what),
        best_estimate(best_estimate),
        error_bound(error_bound),
        iterations(iterations) {}

  double best_estimate;
  double error_bound;
  long long iterations;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorCode::invalid_input, what);
}

}  // namespace wiggly
