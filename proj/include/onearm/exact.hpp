#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "onearm/lattice.hpp"
#include "onearm/stats.hpp"

namespace onearm {

enum class ExecPolicy { serial, parallel };

// Flattened interaction graph for enumeration and sampling.  Bulk bonds carry
// k = beta*J; ghost bonds (one per boundary vertex when h > 0) carry beta*h.
// Bond indices: bulk bonds first, then ghost bonds.
struct WeightedGraph {
  int n = 0;
  struct Edge {
    int u, v;
    double k;
  };
  std::vector<Edge> edges;
  std::vector<std::pair<int, double>> ghost;  // (boundary vertex, beta*h)

  int ghost_vertex() const { return n; }
  int total_bonds() const { return int(edges.size() + ghost.size()); }
  std::pair<int, int> bond_ends(int b) const {
    if (b < int(edges.size())) return {edges[b].u, edges[b].v};
    return {ghost[b - edges.size()].first, ghost_vertex()};
  }
  double bond_k(int b) const {
    if (b < int(edges.size())) return edges[b].k;
    return ghost[b - edges.size()].second;
  }
};

WeightedGraph current_graph(const BallGeometry& g, const CouplingSpec& c, double h);

// ---------------------------------------------------------------------------
// Spin-side enumeration
// ---------------------------------------------------------------------------

enum class BoundaryMode { free_bc, field, plus };

struct SpinObservable {
  std::vector<int> vertices;  // product of spins over this multiset
};

struct SpinSums {
  double z = 0;               // normalized partition value
  std::vector<double> sums;   // unnormalized; expectation = sums[i]/z
};

// Exhaustive sum over spin configurations (Gray-code walk, deterministic
// chunked reduction).  In plus mode the shell spins are frozen to +1 and only
// the remaining spins are enumerated; the 1/2^N normalization then counts
// free spins only.
SpinSums spin_sums(const BallGeometry& g, const CouplingSpec& c, BoundaryMode mode,
                   double h, const std::vector<SpinObservable>& obs,
                   int budget_vertices = 24, ExecPolicy policy = ExecPolicy::parallel);

double spin_partition(const BallGeometry& g, const CouplingSpec& c, double h,
                      int budget_vertices = 24, ExecPolicy policy = ExecPolicy::parallel);

double spin_expectation(const BallGeometry& g, const CouplingSpec& c, BoundaryMode mode,
                        double h, const SpinObservable& obs, int budget_vertices = 24,
                        ExecPolicy policy = ExecPolicy::parallel);

// ---------------------------------------------------------------------------
// Current-side enumeration
// ---------------------------------------------------------------------------
//
// A current configuration assigns a nonnegative integer to every bond; its
// sources are the vertices (ghost included) with odd incident label sum.
// Every quantity used here depends on each label only through
// (parity, positivity), so the infinite label sum reduces exactly to three
// states per bond with weights {1, cosh(k)-1, sinh(k)}.  The fast two-state
// mode merges {zero, even-positive} into cosh(k) when support information is
// not needed.

using SourceMask = std::uint64_t;   // bit i = vertex i, bit n = ghost
using SupportMask = std::uint32_t;  // bit b = bond b has positive label

SourceMask source_mask(const WeightedGraph& g, std::span<const int> vertices);

// Sum of weights over configurations with the given sources (two-state mode).
double current_partition(const WeightedGraph& g, SourceMask sources,
                         int budget_bonds = 20, ExecPolicy policy = ExecPolicy::parallel);

// Weight of each support graph among configurations with the given sources
// (three-state mode); result has 2^bonds entries.
std::vector<double> current_support_weights(const WeightedGraph& g, SourceMask sources,
                                            int budget_bonds = 18,
                                            ExecPolicy policy = ExecPolicy::parallel);

double current_event_measure(const WeightedGraph& g, SourceMask sources,
                             const std::function<bool(SupportMask)>& event,
                             int budget_bonds = 18,
                             ExecPolicy policy = ExecPolicy::parallel);

// Exact mean label of one bond under the normalized current measure with the
// given sources (parity-refined series: the bond factor is replaced by
// k*sinh(k) / k*cosh(k) for even/odd parity).
double current_label_mean(const WeightedGraph& g, SourceMask sources, int bond,
                          int budget_bonds = 20);

// Connectivity of two vertices through positive bonds restricted to the
// vertex set `allowed` (ghost excluded unless its bit is set).
bool mask_connected(const WeightedGraph& g, SupportMask support, int a, int b,
                    SourceMask allowed);

// Number of shell vertices connected to `origin` through positive bulk bonds
// (paths inside V_R: ghost bonds never participate).
int mask_shell_reach(const WeightedGraph& g, SupportMask support, int origin,
                     std::span<const int> shell);

// ---------------------------------------------------------------------------
// Identity and inequality checks
// ---------------------------------------------------------------------------

struct TwoSides {
  double lhs = 0, rhs = 0;
};

// Source-switching consequence for a pair of current systems: the n-system
// lives on the whole graph with sources B, the m-system on the bonds inside A
// with no sources; conditioning on "x connected to y inside A" under n+m can
// be traded for switched source sets.  f is any bounded function of the
// combined support.
TwoSides verify_switching(const WeightedGraph& g, SourceMask a_set, SourceMask b_sources,
                          int x, int y, const std::function<double(SupportMask)>& f,
                          int budget_bonds = 18);

// First and second moments of X = #{shell vertices connected to the origin}
// in the product of an (h>0)-weighted system with sources {o, ghost} and a
// free system with no sources, both normalized.
struct PairMoments {
  double x1 = 0, x2 = 0;
};
PairMoments pair_x_moments(const WeightedGraph& with_field, const WeightedGraph& free_graph,
                           int origin, std::span<const int> shell, int budget_bonds = 18);

// Both sides of the finite-volume second-moment correlation inequality:
// lhs = 1-spin expectation at the origin, rhs = (shell sum of products)^2
// over the two-part denominator, every factor enumerated exactly.
struct CorrIneq {
  double lhs = 0, rhs = 0;
  double numerator = 0, den1 = 0, den2 = 0;
};
CorrIneq verify_correlation_inequality(const BallGeometry& g, const CouplingSpec& c,
                                       bool plus_mode, double h, int budget_vertices = 24,
                                       ExecPolicy policy = ExecPolicy::parallel);

}  // namespace onearm
