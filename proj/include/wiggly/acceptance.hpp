#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace wiggly {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::uint64_t seed = 20240611;
  int threads = 0;
  /// Criteria to run (1..10); empty runs all.
  std::vector<int> only;
};

/// Runs the acceptance criteria in order. A criterion that throws is reported as
/// failed with the error text. `on_result` sees each result as soon as it is ready.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options = {},
                                            const std::function<void(const CriterionResult&)>& on_result = {});

inline constexpr int kCriterionCount = 10;

}  // namespace wiggly
