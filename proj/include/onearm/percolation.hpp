#pragma once

#include <cstdint>
#include <vector>

#include "onearm/exact.hpp"
#include "onearm/lattice.hpp"
#include "onearm/rng.hpp"
#include "onearm/stats.hpp"

namespace onearm {

// Union-find with path halving.
struct UnionFind {
  std::vector<int> parent;
  void init(int n);
  int find(int v);
  void unite(int a, int b);
};

// One percolation configuration: occupied-bond bitmap with the matching
// union-find structure.  `audit` re-derives every connectivity answer by
// breadth-first search over the bitmap.
struct PercState {
  std::vector<std::uint8_t> occupied;
  UnionFind uf;

  // draws one uniform per bond, in bond order (shared-uniform coupling
  // across occupation levels for equal seeds)
  void sample(const BallGeometry& g, double p, Rng& rng);
  bool connected(int a, int b) { return uf.find(a) == uf.find(b); }
  bool audit(const BallGeometry& g);
};

// One-arm frequency: probability that the origin reaches the shell through
// occupied bonds.  Bond {u,v} is occupied with probability p*J_{u,v}; one
// uniform per bond, in bond order, so runs with equal seeds share uniforms
// across p (monotone coupling).
Estimate sample_theta_r(const BallGeometry& g, const CouplingSpec& c, double p,
                        std::uint64_t samples, std::uint64_t seed,
                        ExecPolicy policy = ExecPolicy::parallel);

// Same configurations evaluated at several nested shells at once.
std::vector<Estimate> sample_theta_nested(const BallGeometry& g, const CouplingSpec& c,
                                          double p, const std::vector<double>& radii,
                                          std::uint64_t samples, std::uint64_t seed,
                                          ExecPolicy policy = ExecPolicy::parallel);

std::vector<Estimate> sample_two_point_perc(const BallGeometry& g, const CouplingSpec& c,
                                            double p,
                                            const std::vector<std::pair<std::vector<int>,
                                                                        std::vector<int>>>& pairs,
                                            std::uint64_t samples, std::uint64_t seed,
                                            ExecPolicy policy = ExecPolicy::parallel);

// Simulated second-moment check at one inner radius: lhs is the one-arm
// frequency, rhs is assembled from measured two-point frequencies,
// (sum_x G(o,x))^2 / sum_u G(o,u) (sum_x G(u,x))^2 with u running over the
// ball; the omitted outside-the-ball part of the u-sum is extrapolated from
// the outermost dyadic band and reported, never silently dropped.
struct PercCorrReport {
  double r = 0;
  Estimate lhs;
  Estimate rhs;           // from block spread
  double tail_estimate = 0;
  bool pass_3sigma = false;
};
std::vector<PercCorrReport> perc_correlation_check(const BallGeometry& g,
                                                   const CouplingSpec& c, double p,
                                                   const std::vector<double>& radii,
                                                   std::uint64_t samples, std::uint64_t seed,
                                                   int blocks = 16,
                                                   ExecPolicy policy = ExecPolicy::parallel);

// Exact enumeration over occupied-bond subsets (small graphs).
struct PercExact {
  double theta = 0;                    // P(origin reaches shell)
  std::vector<double> g_origin;        // G(o, v) for every vertex
  std::vector<std::vector<double>> g;  // G(u, v) full matrix
  double rhs = 0;                      // second-moment bound assembled from G
};
PercExact perc_exact_check(const BallGeometry& g, const CouplingSpec& c, double p,
                           int budget_bonds = 20);

// Exact two-arm tree bound: P(o reaches x and y) vs sum_u G(o,u)G(u,x)G(u,y)
// for every shell pair (x, y).
struct TreeGraphRow {
  int x = 0, y = 0;
  double lhs = 0, rhs = 0;
};
struct TreeGraphReport {
  std::vector<TreeGraphRow> rows;
  double max_violation = 0;  // max(lhs - rhs), <= 0 when the bound holds
};
TreeGraphReport tree_graph_check(const BallGeometry& g, const CouplingSpec& c, double p,
                                 int budget_bonds = 20);

}  // namespace onearm
