#pragma once

#include <stdexcept>
#include <string>

namespace onearm {

// Malformed experiment configuration or bad CLI usage.  Exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An exact computation would exceed its enumeration budget.  Exit code 3.
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace onearm
