#include "wiggly/error.hpp"

namespace wiggly {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_input: return "invalid input";
    case ErrorCode::non_coercive: return "non-coercive objective";
    case ErrorCode::monotonicity_violation: return "monotonicity violation";
    case ErrorCode::budget_exceeded: return "budget exceeded";
    case ErrorCode::hypothesis_violated: return "hypothesis violated";
    case ErrorCode::not_found: return "not found";
    case ErrorCode::quadrature_singularity: return "quadrature singularity";
    case ErrorCode::pinned: return "pinned";
    case ErrorCode::well_escape: return "well escape";
    case ErrorCode::io: return "i/o error";
  }
  return "unknown";
}

}  // namespace wiggly
