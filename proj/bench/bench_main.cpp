// Kernel benchmark: serial versus OpenMP for the hot loops, plus the naive
// reference implementations kept for testing.  Numbers printed are wall
// times; results are cross-checked before timing is reported.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "onearm/exact.hpp"
#include "onearm/percolation.hpp"
#include "onearm/reference.hpp"
#include "onearm/scaling.hpp"

using namespace onearm;

namespace {

double now_s() {
  using namespace std::chrono;
  return duration_cast<duration<double>>(steady_clock::now().time_since_epoch()).count();
}

// best of two alternating runs, so clock drift does not favor either side
template <class A, class B>
std::pair<double, double> race(A&& a, B&& b) {
  double ta = 1e300, tb = 1e300;
  for (int rep = 0; rep < 2; ++rep) {
    double t0 = now_s();
    a();
    double t1 = now_s();
    b();
    double t2 = now_s();
    ta = std::min(ta, t1 - t0);
    tb = std::min(tb, t2 - t1);
  }
  return {ta, tb};
}

struct Row {
  const char* name;
  double serial_s = 0, parallel_s = 0, ref_s = -1;
  double max_rel = 0;
};

void print_row(const Row& r) {
  std::printf("%-22s serial %8.3fs  parallel %8.3fs  speedup %5.2fx", r.name,
              r.serial_s, r.parallel_s, r.serial_s / r.parallel_s);
  if (r.ref_s >= 0) std::printf("  naive %8.3fs", r.ref_s);
  std::printf("  max_rel_diff %.2e\n", r.max_rel);
}

double rel_diff(double a, double b) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1.0});
}

}  // namespace

int main(int argc, char** argv) {
  bool large = argc > 1 && std::string(argv[1]) == "--large";
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::puts("threads: 1 (compiled without OpenMP)");
#endif

  {
    // spin-configuration sums with a realistic observable load
    Row row{"spin enumeration"};
    double radius = large ? 2.9 : 2.5;
    CouplingSpec c = CouplingSpec::nearest_neighbor(2, 1.0, 0.44);
    BallGeometry g = build_ball(c, radius, 1.0);
    std::vector<SpinObservable> obs;
    for (int u = 0; u < g.n(); ++u)
      for (int x : g.boundary) obs.push_back({{u, x}});
    SpinSums serial, parallel;
    auto [ts, tp] = race(
        [&] { serial = spin_sums(g, c, BoundaryMode::field, 0.8, obs, 26, ExecPolicy::serial); },
        [&] { parallel = spin_sums(g, c, BoundaryMode::field, 0.8, obs, 26, ExecPolicy::parallel); });
    double t2 = now_s();
    SpinSums naive = ref::spin_sums_naive(g, c, BoundaryMode::field, 0.8, obs);
    double t3 = now_s();
    row.serial_s = ts;
    row.parallel_s = tp;
    row.ref_s = t3 - t2;
    row.max_rel = rel_diff(serial.z, parallel.z);  // chunked paths are bit-equal
    for (std::size_t i = 0; i < obs.size(); ++i)
      row.max_rel = std::max(row.max_rel, rel_diff(parallel.sums[i], naive.sums[i]));
    print_row(row);
  }

  {
    Row row{"current support sums"};
    CouplingSpec c = CouplingSpec::nearest_neighbor(2, 1.0, 0.5);
    BallGeometry g = build_ball(c, large ? 2.3 : 1.5, 1.0);
    WeightedGraph wg = current_graph(g, c, 0.4);
    std::vector<double> serial, parallel;
    auto [ts, tp] = race([&] { serial = current_support_weights(wg, 0, 24, ExecPolicy::serial); },
                         [&] { parallel = current_support_weights(wg, 0, 24, ExecPolicy::parallel); });
    row.serial_s = ts;
    row.parallel_s = tp;
    for (std::size_t i = 0; i < serial.size(); ++i)
      row.max_rel = std::max(row.max_rel, rel_diff(serial[i], parallel[i]));
    print_row(row);
  }

  {
    Row row{"percolation one-arm"};
    CouplingSpec c = CouplingSpec::nearest_neighbor(2, 1.0, 1.0);
    BallGeometry g = build_ball(c, large ? 34.0 : 20.0, 16.0);
    std::uint64_t samples = large ? 40000 : 20000;
    Estimate serial, parallel;
    auto [ts, tp] = race([&] { serial = sample_theta_r(g, c, 0.5, samples, 11, ExecPolicy::serial); },
                         [&] { parallel = sample_theta_r(g, c, 0.5, samples, 11, ExecPolicy::parallel); });
    double t2 = now_s();
    double naive = ref::theta_naive(g, c, 0.5, samples / 4, 11);
    double t3 = now_s();
    row.serial_s = ts;
    row.parallel_s = tp;
    row.ref_s = (t3 - t2) * 4.0;  // scaled to the same sample count
    row.max_rel = rel_diff(serial.mean, parallel.mean);  // per-config streams
    if (rel_diff(naive, serial.mean) > 0.05)
      std::printf("  warning: naive reference deviates: %f vs %f\n", naive, serial.mean);
    print_row(row);
  }

  {
    Row row{"shell-sum sampling"};
    CouplingSpec c = CouplingSpec::nearest_neighbor(5, 1.0, 1.0);
    PowerLawKernel k = PowerLawKernel::mean_field(5);
    ArmWeight arm{0.5, true, false};
    ScalingBudget budget;
    budget.exact_ops = 0;
    budget.usamples = large ? 24000 : 8000;
    budget.xpool = 1024;
    budget.xsamples = 2048;
    budget.seed = 5;
    double r = large ? 24.0 : 12.0;
    Term2 serial, parallel;
    auto [ts, tp] = race(
        [&] {
          ScalingBudget b = budget;
          b.policy = ExecPolicy::serial;
          serial = denominator_term2(k, c, r, arm, b);
        },
        [&] {
          ScalingBudget b = budget;
          b.policy = ExecPolicy::parallel;
          parallel = denominator_term2(k, c, r, arm, b);
        });
    row.serial_s = ts;
    row.parallel_s = tp;
    row.max_rel = rel_diff(serial.total.value, parallel.total.value);
    print_row(row);
  }

  return 0;
}
