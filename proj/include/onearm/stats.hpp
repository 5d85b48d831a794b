#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace onearm {

// A measured quantity with a blocking-based error bar.
struct Estimate {
  double mean = 0.0;
  double std_err = 0.0;
  double tau = 0.0;  // integrated autocorrelation time estimate
  std::uint64_t count = 0;
  bool warn_thermalization = false;
};

// Deterministic pairwise sum; result is independent of thread count because
// callers always pass the same fixed layout.
double pairwise_sum(const double* x, std::size_t n);
inline double pairwise_sum(std::span<const double> x) {
  return pairwise_sum(x.data(), x.size());
}

struct Kahan {
  double s = 0.0, c = 0.0;
  void add(double x) {
    double y = x - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  double value() const { return s; }
};

// Mean with a blocking error bar: block size doubles until the blocked
// standard error plateaus (within 10%) while keeping at least `min_blocks`
// blocks.  tau is inferred from the ratio of blocked to naive errors.
Estimate blocked_estimate(const std::vector<double>& xs, int min_blocks = 16);

// Mean/spread over a small set of independent replicate values.
Estimate from_replicates(const std::vector<double>& values);

// Order-fixed associative merge of per-replica estimates (equal-length
// replicas assumed): mean of means, errors combined in quadrature.
Estimate merge_estimates(const std::vector<Estimate>& parts);

// Upper regularized incomplete gamma Q(a, x), and the chi-square survival
// function built on it.
double gamma_q(double a, double x);
double chi2_sf(double x, int dof);

}  // namespace onearm
