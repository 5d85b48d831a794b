#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "onearm/config.hpp"
#include "onearm/results.hpp"

namespace onearm {

struct RunOutcome {
  RunRecord record;
  bool pass = true;
};

// Dispatches a configuration to its module, appends result rows and the run
// record to the configured files, and prints a line-oriented report to `log`.
// Kinds: verify-exact, ising-arm, ising-twopoint, worm, percolation, scaling,
// fit, report.
RunOutcome run_experiment(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace onearm
