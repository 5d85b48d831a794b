// Acceptance suite: one entry per release criterion, each printing PASS/FAIL
// lines for its sub-checks.  Usage: acceptance [N ...]; no arguments runs all
// eight.  Exit code 0 iff every executed criterion passes.

#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "onearm/exact.hpp"
#include "onearm/ising_mc.hpp"
#include "onearm/percolation.hpp"
#include "onearm/scaling.hpp"
#include "onearm/verify_suite.hpp"
#include "onearm/worm.hpp"

using namespace onearm;

namespace {

int failures = 0;

void check(bool pass, const std::string& label) {
  std::printf("  %s %s\n", pass ? "PASS" : "FAIL", label.c_str());
  if (!pass) ++failures;
}

void check_value(double value, double target, double tol, const std::string& label) {
  bool pass = std::fabs(value - target) <= tol;
  std::printf("  %s %s value=%.4f target=%.2f+-%.2f\n", pass ? "PASS" : "FAIL",
              label.c_str(), value, target, tol);
  if (!pass) ++failures;
}

// criterion 1: spin-side and current-side enumeration agree on Z and on
// spin expectations over 50 randomized small geometries, at 1e-10
void criterion_1() {
  std::puts("criterion 1: representation identities (50 random geometries, rel 1e-10)");
  auto lines = representation_identity_suite(50, 2024, 1e-10);
  int bad = 0;
  double worst = 0;
  for (auto& line : lines) {
    worst = std::max(worst, line.rel_err);
    if (!line.pass) ++bad;
  }
  std::printf("  checks=%zu worst_rel=%.3e\n", lines.size(), worst);
  check(bad == 0, "all identities within 1e-10");
}

// criterion 2: the source-switching consequence on 100 randomized
// (geometry, A, B, x, y, f) tuples, at 1e-10
void criterion_2() {
  std::puts("criterion 2: switching identity (100 random instances, rel 1e-10)");
  auto lines = switching_identity_suite(100, 515, 1e-10);
  int bad = 0;
  double worst = 0;
  for (auto& line : lines) {
    worst = std::max(worst, line.rel_err);
    if (!line.pass) ++bad;
  }
  std::printf("  checks=%zu worst_rel=%.3e\n", lines.size(), worst);
  check(bad == 0, "all switching instances within 1e-10");
}

// criterion 3: the finite-volume correlation inequality on the d in {1,2}
// grid of couplings and fields, enumerated exactly on both sides
void criterion_3() {
  std::puts("criterion 3: finite-volume correlation inequality (exact, 20 instances)");
  auto lines = correlation_inequality_suite();
  std::printf("  instances=%zu\n", lines.size());
  bool count_ok = lines.size() >= 20;
  check(count_ok, "at least 20 instances spanning d in {1,2}, three betas, three fields");
  int bad = 0;
  for (auto& line : lines)
    if (!line.pass) ++bad;
  check(bad == 0, "lower bound holds exactly on every instance");
}

// criterion 4: percolation bounds: exact on enumerable graphs for three
// occupation levels, simulated at the d=2 critical point
void criterion_4() {
  std::puts("criterion 4: percolation two-arm tree bound and second-moment bound");
  auto lines = percolation_exact_suite();
  int bad = 0;
  for (auto& line : lines)
    if (!line.pass) ++bad;
  std::printf("  exact checks=%zu\n", lines.size());
  check(bad == 0, "exact bounds hold for p in {0.2, 0.5, 0.8}");

  CouplingSpec c = CouplingSpec::nearest_neighbor(2, 1.0, 1.0);
  BallGeometry g = build_ball(c, 64.0, 8.0);
  auto reports = perc_correlation_check(g, c, 0.5, {8.0, 16.0, 32.0}, 100000, 2024, 16);
  for (auto& rep : reports) {
    char label[160];
    std::snprintf(label, sizeof label,
                  "simulated bound at r=%g: lhs=%.4f rhs=%.3e tail=%.2e", rep.r,
                  rep.lhs.mean, rep.rhs.mean, rep.tail_estimate);
    check(rep.pass_3sigma, label);
  }
}

// criterion 5: the d=5 shell-sum scalings with the mean-field kernel
void criterion_5() {
  std::puts("criterion 5: d=5 shell-sum scaling (kernel exponent -3, eps=0.5)");
  CouplingSpec c = CouplingSpec::nearest_neighbor(5, 1.0, 1.0);
  PowerLawKernel k = PowerLawKernel::mean_field(5);
  ArmWeight arm{0.5, true, false};
  ScalingBudget budget;
  budget.seed = 2024;

  std::vector<double> radii = {8, 12, 16, 24, 32, 48};
  std::vector<std::pair<double, SumEstimate>> s_bound, s_t1, s_i, s_ii, s_iii, s_rhs;
  bool stderr_ok = true;
  for (double r : radii) {
    SumEstimate bound = boundary_kernel_sum(k, c, r);
    SumEstimate t1 = denominator_term1(k, c, r, budget);
    Term2 t2 = denominator_term2(k, c, r, arm, budget);
    SumEstimate rhs = rhs_lower_bound(k, c, r, arm, budget);
    s_bound.emplace_back(r, bound);
    s_t1.emplace_back(r, t1);
    s_i.emplace_back(r, t2.case_i);
    s_ii.emplace_back(r, t2.case_ii);
    s_iii.emplace_back(r, t2.case_iii);
    s_rhs.emplace_back(r, rhs);
    for (const SumEstimate* se : {&t1, &t2.case_i, &t2.case_ii, &t2.case_iii, &rhs})
      if (se->sampled && se->std_err > 0.2 * std::fabs(se->value)) stderr_ok = false;
    std::printf("  r=%g boundary=%.4g term1=%.4g cases=(%.4g, %.4g, %.4g) rhs=%.4g\n",
                r, bound.value, t1.value, t2.case_i.value, t2.case_ii.value,
                t2.case_iii.value, rhs.value);
  }
  check(stderr_ok, "sampling errors at or below 20% of each value");
  check_value(fit_exponent(s_bound).slope, 1.0, 0.1, "shell kernel sum slope");
  check_value(fit_exponent(s_t1).slope, 2.0, 0.2, "pair-sum slope");
  check_value(fit_exponent(s_ii).slope, 3.0, 0.3, "near-shell regime slope");
  check_value(fit_exponent(s_i).slope, 2.5, 0.3, "inner regime slope");
  check_value(fit_exponent(s_iii).slope, 2.5, 0.3, "far regime slope");
  check_value(fit_exponent(s_rhs).slope, -1.0, 0.15, "assembled lower-bound slope");
}

// criterion 6: the d=7 percolation analogue of the assembled bound
void criterion_6() {
  std::puts("criterion 6: d=7 percolation shell-sum scaling");
  CouplingSpec c = CouplingSpec::nearest_neighbor(7, 1.0, 1.0);
  PowerLawKernel k = PowerLawKernel::mean_field(7);
  ScalingBudget budget;
  budget.seed = 2024;
  std::vector<std::pair<double, SumEstimate>> s_rhs;
  for (double r : {8.0, 12.0, 16.0, 24.0, 32.0}) {
    SumEstimate rhs = perc_rhs_bound(k, c, r, budget);
    s_rhs.emplace_back(r, rhs);
    std::printf("  r=%g rhs=%.4g +- %.2g\n", r, rhs.value, rhs.std_err);
  }
  check_value(fit_exponent(s_rhs).slope, -2.0, 0.25, "assembled bound slope");
}

// criterion 7: sampler calibration against enumeration over 100 seeds each
void criterion_7() {
  std::puts("criterion 7: sampler calibration on enumerable geometries (100 seeds)");
  const int n_seeds = 100;

  int mc_total = 0, mc_ok = 0;
  for (int idx = 0; idx < 10; ++idx) {
    SmallInstance inst = make_small_instance(4040, idx, false);
    bool plus = idx % 2 == 0;
    double exact;
    std::vector<int> origin_pt(inst.geometry.dim, 0);
    int o = inst.geometry.index_of(origin_pt);
    std::pair<int, int> pair_idx{0, o};
    if (plus) {
      exact = spin_expectation(inst.geometry, inst.coupling, BoundaryMode::plus, 0, {{o}});
    } else {
      exact = spin_expectation(inst.geometry, inst.coupling, BoundaryMode::free_bc, 0,
                               {{pair_idx.first, pair_idx.second}});
    }
    for (int seed = 0; seed < n_seeds; ++seed) {
      ChainConfig cfg;
      cfg.sampler = idx % 3 == 2 ? Sampler::local_flip
                                 : (plus ? Sampler::full_sweep : Sampler::single_cluster);
      cfg.therm = 400;
      cfg.sweeps = 6000;
      cfg.stride = 1;
      cfg.replicas = 1;
      cfg.seed = std::uint64_t(9000 + seed);
      Estimate e;
      if (plus) {
        e = estimate_one_arm_plus(inst.geometry, inst.coupling, cfg);
      } else {
        IsingModel model = IsingModel::from_ball(inst.geometry, inst.coupling, false);
        std::vector<double> series;
        run_chain(model, cfg, 0, [&](const std::vector<signed char>& s) {
          series.push_back(double(s[pair_idx.first]) * double(s[pair_idx.second]));
        });
        e = blocked_estimate(series);
      }
      ++mc_total;
      if (std::fabs(e.mean - exact) <= 3.0 * std::max(e.std_err, 1e-12)) ++mc_ok;
    }
  }
  std::printf("  spin chains: %d/%d within 3 sigma\n", mc_ok, mc_total);
  check(double(mc_ok) >= 0.99 * double(mc_total), "spin-chain coverage at or above 99%");

  int worm_total = 0, worm_ok = 0;
  for (int idx = 0; idx < 10; ++idx) {
    SmallInstance inst = make_small_instance(5050, idx, true);
    if (inst.h == 0) inst.h = 0.4;
    WeightedGraph graph = current_graph(inst.geometry, inst.coupling, inst.h);
    if (graph.total_bonds() > 14) graph = current_graph(inst.geometry, inst.coupling, 0.0);
    std::vector<int> origin_pt(inst.geometry.dim, 0);
    int o = inst.geometry.index_of(origin_pt);
    int target = inst.geometry.boundary.front();
    SourceMask allowed = (SourceMask(1) << inst.geometry.n()) - 1;
    double z = current_partition(graph, 0);
    double event_prob = current_event_measure(graph, 0, [&](SupportMask m) {
      return mask_connected(graph, m, o, target, allowed);
    }) / z;
    // near-deterministic connection events carry no sampling information at
    // this chain length; those instances calibrate on a bond's mean label
    bool use_event = event_prob >= 0.04 && event_prob <= 0.96;
    double exact = use_event ? event_prob : current_label_mean(graph, 0, 0);
    for (int seed = 0; seed < n_seeds; ++seed) {
      WormConfig cfg;
      cfg.steps = 300000;
      cfg.stride = 16;
      cfg.replicas = 2;
      cfg.seed = std::uint64_t(7000 + seed);
      std::vector<Estimate> parts;
      for (int rep = 0; rep < cfg.replicas; ++rep) {
        std::vector<double> series;
        worm_sample(graph, 0, cfg, rep, [&](const WormChain& chain) {
          if (use_event) {
            SupportMask m = 0;
            for (std::size_t b = 0; b < chain.labels().size(); ++b)
              if (chain.labels()[b] > 0) m |= SupportMask(1) << b;
            series.push_back(mask_connected(graph, m, o, target, allowed) ? 1.0 : 0.0);
          } else {
            series.push_back(double(chain.labels()[0]));
          }
        });
        parts.push_back(blocked_estimate(series));
      }
      Estimate e = merge_estimates(parts);
      ++worm_total;
      if (std::fabs(e.mean - exact) <= 3.0 * std::max(e.std_err, 1e-12)) ++worm_ok;
    }
  }
  std::printf("  current chains: %d/%d within 3 sigma\n", worm_ok, worm_total);
  check(double(worm_ok) >= 0.99 * double(worm_total),
        "current-chain coverage at or above 99%");
}

// criterion 8: d=2 critical-point physics: two-point decay, one-arm decay,
// and the one-arm versus square-root-of-two-point bound
void criterion_8() {
  std::puts("criterion 8: d=2 critical chains");
  const double beta_c = 0.44068679350977151;  // log(1+sqrt(2))/2
  CouplingSpec c = CouplingSpec::nearest_neighbor(2, 1.0, beta_c);

  // two-point decay over |x| in [4, 24]
  std::vector<double> xs = {4, 6, 8, 12, 16, 24};
  std::vector<std::pair<double, Estimate>> two_point;
  {
    // the free boundary suppresses long-distance correlations, so the ball
    // radius sits well above the margin default (the bias scales like
    // (x/R)^2 and still shifts the window slope by -0.04 at R = 192)
    BallGeometry g = build_ball(c, 256.0, 128.0);
    ChainConfig cfg;
    cfg.sampler = Sampler::single_cluster;
    cfg.therm = 8000;
    cfg.sweeps = 340000;
    cfg.stride = 6;
    cfg.replicas = 2;
    cfg.seed = 808;
    std::vector<std::vector<std::pair<std::vector<int>, std::vector<int>>>> groups;
    std::vector<int> origin{0, 0};
    for (double x : xs) {
      std::vector<std::pair<std::vector<int>, std::vector<int>>> group;
      for (int axis = 0; axis < 2; ++axis)
        for (int sign : {1, -1}) {
          std::vector<int> p(2, 0);
          p[axis] = sign * int(x);
          group.emplace_back(origin, p);
        }
      groups.push_back(group);
    }
    auto est = estimate_two_point_grouped(g, c, cfg, groups, 2.0);
    std::vector<FitPoint> pts;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      std::printf("  two-point |x|=%g: %.4f +- %.4f\n", xs[i], est[i].mean,
                  est[i].std_err);
      two_point.emplace_back(xs[i], est[i]);
      pts.push_back({xs[i], est[i].mean, est[i].std_err});
    }
    FitResult fit = fit_loglog(pts);
    std::printf("  two-point slope %.4f +- %.4f\n", fit.slope, fit.slope_err);
    check_value(fit.slope, -0.25, 0.05, "two-point decay slope");
  }

  // one-arm decay over r in {4, 8, 16, 32} plus the radii the bound check needs
  std::vector<std::pair<double, Estimate>> one_arm;
  {
    ChainConfig cfg;
    cfg.sampler = Sampler::full_sweep;
    cfg.therm = 4000;
    cfg.sweeps = 120000;
    cfg.stride = 3;
    cfg.replicas = 2;
    cfg.seed = 909;
    for (double r : {4.0, 6.0, 8.0, 16.0, 32.0}) {
      BallGeometry g = build_ball(c, r + 1.25, r);
      Estimate e = estimate_one_arm_plus(g, c, cfg);
      std::printf("  one-arm r=%g: %.4f +- %.4f\n", r, e.mean, e.std_err);
      one_arm.emplace_back(r, e);
    }
    std::vector<std::pair<double, Estimate>> fit_series;
    for (auto& [r, e] : one_arm)
      if (r != 6.0) fit_series.emplace_back(r, e);
    FitResult fit = estimate_rho(fit_series);
    std::printf("  one-arm slope %.4f +- %.4f\n", fit.slope, fit.slope_err);
    bool in_window = fit.slope >= -0.18 && fit.slope <= -0.08;
    check(in_window, "one-arm decay slope inside [-0.18, -0.08]");
  }

  // matched-radius bound: one-arm at |x|/3 against sqrt(two-point at x)
  {
    std::vector<std::pair<double, Estimate>> arm_for_check;
    for (auto& [r, e] : one_arm)
      if (r == 4.0 || r == 6.0 || r == 8.0) arm_for_check.emplace_back(r, e);
    std::vector<std::pair<double, Estimate>> two_for_check;
    for (auto& [x, e] : two_point)
      if (x == 12.0 || x == 18.0 || x == 24.0) two_for_check.emplace_back(x, e);
    // |x| = 18 was not measured above; measure it directly against r = 6
    {
      BallGeometry g = build_ball(c, 96.0, 48.0);
      ChainConfig cfg;
      cfg.sampler = Sampler::single_cluster;
      cfg.therm = 4000;
      cfg.sweeps = 120000;
      cfg.stride = 4;
      cfg.replicas = 2;
      cfg.seed = 717;
      std::vector<int> origin{0, 0}, x18{18, 0}, y18{0, 18}, xm{-18, 0}, ym{0, -18};
      auto est = estimate_two_point_grouped(
          g, c, cfg, {{{origin, x18}, {origin, y18}, {origin, xm}, {origin, ym}}}, 2.0);
      two_for_check.emplace_back(18.0, est[0]);
    }
    TasakiReport rep = tasaki_check(arm_for_check, two_for_check, 1.0);
    for (auto& row : rep.rows)
      std::printf("  bound |x|=%g: one-arm=%.4f sqrt(two-point)=%.4f margin=%.1f sigma\n",
                  row.x_norm, row.lhs.mean, row.rhs, row.margin_sigma);
    check(rep.rows.size() >= 3, "three matched radii evaluated");
    check(!rep.any_violation, "no violation beyond 3 sigma");
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::function<void()>> criteria = {
      criterion_1, criterion_2, criterion_3, criterion_4,
      criterion_5, criterion_6, criterion_7, criterion_8};
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    int id = std::atoi(argv[i]);
    if (id < 1 || id > int(criteria.size())) {
      std::fprintf(stderr, "unknown criterion %s\n", argv[i]);
      return 2;
    }
    selected.push_back(id);
  }
  if (selected.empty())
    for (int i = 1; i <= int(criteria.size()); ++i) selected.push_back(i);

  for (int id : selected) {
    int before = failures;
    criteria[std::size_t(id - 1)]();
    std::printf("criterion %d: %s\n", id, failures == before ? "PASS" : "FAIL");
  }
  if (failures) std::printf("acceptance: %d check(s) failed\n", failures);
  else std::puts("acceptance: all executed criteria passed");
  return failures ? 1 : 0;
}
