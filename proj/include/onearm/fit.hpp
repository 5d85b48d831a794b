#pragma once

#include <string>
#include <utility>
#include <vector>

#include "onearm/stats.hpp"

namespace onearm {

struct FitPoint {
  double x = 0;      // abscissa (e.g. radius), must be > 0 for log-log
  double value = 0;  // ordinate, must be > 0 for log-log
  double err = 0;    // standard error of the ordinate (0 = exact)
};

struct FitResult {
  double slope = 0, slope_err = 0;
  double intercept = 0, intercept_err = 0;
  double chi2 = 0;
  int ndof = 0;
  double curvature = 0;       // quadratic coefficient in log-log
  bool curvature_flag = false; // true when the data look pre-asymptotic
  std::vector<double> residuals;
  std::string note;

  double slope_ci95_low() const { return slope - 1.96 * slope_err; }
  double slope_ci95_high() const { return slope + 1.96 * slope_err; }
};

// Weighted least-squares line through (log x, log value); weights come from
// the relative errors.  A quadratic side-fit flags curvature.
FitResult fit_loglog(const std::vector<FitPoint>& pts,
                     double curvature_threshold = 0.05);

// Decay-rate fit for a one-arm series (r, estimate).  The returned slope is
// the signed log-log slope (so the rate estimate is -slope).  Requires at
// least 4 radii spanning an octave and values positive at 3 sigma.
FitResult estimate_rho(const std::vector<std::pair<double, Estimate>>& series);

}  // namespace onearm
