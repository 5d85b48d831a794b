#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "onearm/exact.hpp"
#include "onearm/fit.hpp"
#include "onearm/lattice.hpp"
#include "onearm/stats.hpp"

namespace onearm {

enum class Sampler { single_cluster, full_sweep, local_flip };

Sampler sampler_from_string(const std::string& s);

struct ChainConfig {
  Sampler sampler = Sampler::full_sweep;
  int therm = 2000;
  int sweeps = 20000;   // cluster samplers: one sweep = one update
  int stride = 1;
  int replicas = 2;
  std::uint64_t seed = 1;
  void validate() const;
};

// Flattened simulation model.  Frozen vertices stay at +1; cluster moves
// treat them as unflippable, so a single-cluster proposal that activates a
// bond into the frozen shell is rejected and a full-sweep component that
// contains a frozen vertex keeps its orientation.
struct IsingModel {
  int n = 0;
  std::vector<std::pair<int, int>> bonds;
  std::vector<double> k;           // beta*J per bond
  std::vector<double> p_add;       // 1 - exp(-2k)
  std::vector<int> adj_off;        // CSR over vertices
  std::vector<int> adj_vertex;
  std::vector<int> adj_bond;
  std::vector<char> frozen;
  std::vector<int> free_list;
  int origin = -1;

  static IsingModel from_ball(const BallGeometry& g, const CouplingSpec& c, bool plus_mode);
};

// Runs one replica and hands each measurement snapshot (spin array) to `fn`.
void run_chain(const IsingModel& m, const ChainConfig& cfg, int replica,
               const std::function<void(const std::vector<signed char>&)>& fn);

// <sigma_o> with the shell frozen to +1.
Estimate estimate_one_arm_plus(const BallGeometry& g, const CouplingSpec& c,
                               const ChainConfig& cfg);

// Free-boundary two-point values for explicit vertex pairs, one chain shared
// by all pairs.  Each inner vector of `groups` is measured as the average of
// its pairs (a single time series per group).
std::vector<Estimate> estimate_two_point(const BallGeometry& g, const CouplingSpec& c,
                                         const ChainConfig& cfg,
                                         const std::vector<std::pair<std::vector<int>,
                                                                     std::vector<int>>>& pairs,
                                         double r_margin = 2.0);
std::vector<Estimate> estimate_two_point_grouped(
    const BallGeometry& g, const CouplingSpec& c, const ChainConfig& cfg,
    const std::vector<std::vector<std::pair<std::vector<int>, std::vector<int>>>>& groups,
    double r_margin = 2.0);

// One-arm value at r = |x|/3 against the square root of the two-point value
// at x, in matched pairs.
struct TasakiRow {
  double x_norm = 0, r = 0;
  Estimate lhs;     // one-arm value
  double rhs = 0;   // sqrt(two-point)
  double rhs_err = 0;
  double margin_sigma = 0;
  bool violation = false;
};
struct TasakiReport {
  std::vector<TasakiRow> rows;
  bool any_violation = false;
};
TasakiReport tasaki_check(const std::vector<std::pair<double, Estimate>>& one_arm_by_r,
                          const std::vector<std::pair<double, Estimate>>& two_point_by_x,
                          double coupling_range);

}  // namespace onearm
