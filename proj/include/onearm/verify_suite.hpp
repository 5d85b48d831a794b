#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "onearm/exact.hpp"
#include "onearm/lattice.hpp"

namespace onearm {

struct CheckLine {
  std::string name;
  std::string anchor;
  double lhs = 0, rhs = 0;
  double rel_err = 0;  // |lhs-rhs| / max(|lhs|,1); for inequalities, the violation amount
  bool pass = false;
};

// Deterministic pool of small geometries (at most 5 vertices or 12 bulk
// bonds) with randomized couplings.
struct SmallInstance {
  CouplingSpec coupling;
  BallGeometry geometry;
  double h = 0;
};
SmallInstance make_small_instance(std::uint64_t seed, int index, bool with_field);

// Partition and two-point values computed by spin enumeration versus current
// enumeration.
std::vector<CheckLine> representation_identity_suite(int count, std::uint64_t seed,
                                                     double tol);

// Both sides of the source-switching consequence on randomized
// (geometry, A, B, x, y, f) tuples.
std::vector<CheckLine> switching_identity_suite(int count, std::uint64_t seed, double tol);

// The moment chain behind the second-moment bound: the Cauchy-Schwarz
// inequality for X, the exact first-moment rewrite, and the assembled
// first-moment lower bound.
std::vector<CheckLine> moment_chain_suite(int count, std::uint64_t seed, double tol);

// Exact finite-volume correlation inequality over a d in {1,2} grid of
// couplings and fields (plus mode included).
std::vector<CheckLine> correlation_inequality_suite(int budget_vertices = 24);

// Exact percolation checks: two-arm tree bound and the assembled
// second-moment bound on enumerable graphs for p in {0.2, 0.5, 0.8}.
std::vector<CheckLine> percolation_exact_suite();

}  // namespace onearm
