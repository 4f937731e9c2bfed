#pragma once

#include <stdexcept>
#include <string>

namespace pauliprobe {

// Invalid user-supplied configuration (bad ranges, inconsistent fields).
// The CLI maps this to exit code 2.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A plan whose parameters violate a precondition of the analysis (for
// example alpha > 1/2, outside the Taylor regime) or whose sample counts
// exceed the runnable budget. The CLI maps this to exit code 3.
struct PlanInfeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rejection sampling for a planted instance ran out of attempts.
struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pauliprobe
