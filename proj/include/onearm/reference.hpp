#pragma once

// Plain serial reference implementations kept alongside the optimized
// kernels.  These recompute everything from scratch with the most obvious
// loops; tests compare them against the production paths and the benchmark
// target times both.

#include <vector>

#include "onearm/exact.hpp"
#include "onearm/lattice.hpp"

namespace onearm::ref {

// Full per-configuration energy recomputation, no Gray code, no chunking.
SpinSums spin_sums_naive(const BallGeometry& g, const CouplingSpec& c, BoundaryMode mode,
                         double h, const std::vector<SpinObservable>& obs);

// Truncated label series: every bond label runs over 0..max_label.  Only
// feasible for a handful of bonds; validates the parity reduction including
// its (absent) truncation error.
double current_partition_series(const WeightedGraph& g, SourceMask sources,
                                int max_label = 24);

// Single-threaded percolation one-arm frequency with breadth-first search
// connectivity (no union-find).
double theta_naive(const BallGeometry& g, const CouplingSpec& c, double p,
                   std::uint64_t samples, std::uint64_t seed);

// Lattice points of the ball |v| <= radius in lexicographic order.
std::vector<std::vector<int>> ball_points(int dim, double radius);

// Shell around radius r for a nearest-neighbor coupling (euclidean norm),
// by scanning the enclosing box.
std::vector<std::vector<int>> shell_points(int dim, double r);

}  // namespace onearm::ref
