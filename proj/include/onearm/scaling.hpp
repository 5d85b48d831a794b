#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "onearm/exact.hpp"
#include "onearm/fit.hpp"
#include "onearm/lattice.hpp"
#include "onearm/rng.hpp"

namespace onearm {

// Radially symmetric power-law kernel (max(|x|,1))^exponent, evaluated on the
// squared norm.
struct PowerLawKernel {
  int dim = 5;
  double exponent = -3.0;  // default 2-dim
  static PowerLawKernel mean_field(int d) { return {d, 2.0 - double(d)}; }
  double eval_sq(double q) const;
};

// min(1, max(1, dist)^-(1+eps)); dist is the radial surrogate |r - |u|| by
// default, or the exact distance to the shell in enumerated mode.
struct ArmWeight {
  double eps = 0.5;
  bool radial = true;
  bool degenerate_one = false;  // weight identically 1
  static ArmWeight one() { return {0.0, true, true}; }
  double from_dist(double dist) const;
};

struct SumEstimate {
  double value = 0;
  double std_err = 0;      // 0 in exact mode
  double tail_bound = 0;   // analytic bound on the truncated remainder
  bool sampled = false;
  std::uint64_t terms = 0;  // enumerated terms or drawn samples
};

// Counts of lattice points of Z^i by squared norm, i <= dim, q <= qmax, with
// conditional sampling of coordinates.  Shared across radii.
class RadialTable {
 public:
  RadialTable(int dim, long long qmax);
  int dim() const { return dim_; }
  long long qmax() const { return qmax_; }
  std::uint64_t count_at(long long q) const { return f_.back()[std::size_t(q)]; }
  // number of points with qlo <= |u|^2 < qhi
  std::uint64_t count_range(long long qlo, long long qhi) const;
  long long sample_q(Rng& rng, long long qlo, long long qhi) const;
  void sample_point(Rng& rng, long long q, std::span<int> out) const;

  static std::shared_ptr<const RadialTable> shared(int dim, long long qmax);

 private:
  int dim_;
  long long qmax_;
  std::vector<std::vector<std::uint64_t>> f_;  // f_[i][q]
  std::vector<std::uint64_t> prefix_;          // cumulative over f_[dim]
};

// Nearest-neighbor shell around euclidean radius r: lattice points outside
// the ball with a unit step into it.  Counting and sampling go through a
// (squared norm, max coordinate) table, so no shell is ever materialized.
class ShellTable {
 public:
  ShellTable(int dim, double r);
  std::uint64_t size() const { return total_; }
  double kernel_sum(const PowerLawKernel& k) const;  // exact sum of k over the shell
  void sample_point(Rng& rng, std::span<int> out) const;
  bool contains(std::span<const int> v) const;

 private:
  int dim_;
  double r_;
  long long smax_;
  int mmax_;
  std::vector<std::uint64_t> exact_;   // C[i][s][m]
  std::vector<std::uint64_t> atmost_;  // D[i][s][m]
  struct ValidClass {
    int s, m;
    std::uint64_t cum;
  };
  std::vector<ValidClass> classes_;
  std::uint64_t total_ = 0;

  std::uint64_t& c_at(int i, long long s, int m);
  std::uint64_t& d_at(int i, long long s, int m);
  std::uint64_t c_val(int i, long long s, int m) const;
  std::uint64_t d_val(int i, long long s, int m) const;
};

struct ScalingBudget {
  std::uint64_t exact_ops = 50'000'000;  // switch to sampling above this
  int replicates = 16;
  std::uint64_t xpool = 2048;     // shell pool size per replicate
  std::uint64_t xsamples = 4096;  // x draws for the pair sum
  std::uint64_t usamples = 24000; // u draws per replicate, split over strata
  double umax_factor = 8.0;       // u-sum truncated at |u| <= umax_factor * r
  std::uint64_t seed = 1;
  ExecPolicy policy = ExecPolicy::parallel;
};

// sum_{x in shell} G(x), exact (radial reduction).
SumEstimate boundary_kernel_sum(const PowerLawKernel& k, const CouplingSpec& c, double r);
// Its square: the numerator of the second-moment bound.
SumEstimate numerator_sum(const PowerLawKernel& k, const CouplingSpec& c, double r);

// sum_{x,y in shell} G(x) G(x-y), exact below budget, else sampled.
SumEstimate denominator_term1(const PowerLawKernel& k, const CouplingSpec& c, double r,
                              const ScalingBudget& budget);

// sum_u G(u) armweight(u) (sum_{x in shell} G(u-x))^2 split across the three
// radial regimes |u| < r/2, r/2 <= |u| < 3r/2, |u| >= 3r/2.
struct Term2 {
  SumEstimate total, case_i, case_ii, case_iii;
};
Term2 denominator_term2(const PowerLawKernel& k, const CouplingSpec& c, double r,
                        const ArmWeight& arm, const ScalingBudget& budget);

// numerator / (term1 + term2)
SumEstimate rhs_lower_bound(const PowerLawKernel& k, const CouplingSpec& c, double r,
                            const ArmWeight& arm, const ScalingBudget& budget);

// numerator / sum_u G(u) (sum_x G(u-x))^2  (no arm weight)
SumEstimate perc_rhs_bound(const PowerLawKernel& k, const CouplingSpec& c, double r,
                           const ScalingBudget& budget);

FitResult fit_exponent(const std::vector<std::pair<double, SumEstimate>>& series);

}  // namespace onearm
