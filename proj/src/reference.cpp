#include "onearm/reference.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

#include "onearm/rng.hpp"

namespace onearm::ref {

SpinSums spin_sums_naive(const BallGeometry& g, const CouplingSpec& c, BoundaryMode mode,
                         double h, const std::vector<SpinObservable>& obs) {
  int n = g.n();
  std::vector<char> frozen(n, 0);
  if (mode == BoundaryMode::plus)
    for (int b : g.boundary) frozen[b] = 1;
  std::vector<int> free_vertex;
  for (int v = 0; v < n; ++v)
    if (!frozen[v]) free_vertex.push_back(v);
  int nf = int(free_vertex.size());
  if (nf > 26) throw std::invalid_argument("spin_sums_naive: too many vertices");

  SpinSums out;
  out.sums.assign(obs.size(), 0.0);
  std::vector<double> s(n, 1.0);

  for (std::uint64_t state = 0; state < (std::uint64_t(1) << nf); ++state) {
    for (int i = 0; i < nf; ++i) s[free_vertex[i]] = (state >> i) & 1 ? -1.0 : 1.0;
    double e = 0;
    for (auto& b : g.bonds) e += c.beta * b.j * s[b.u] * s[b.v];
    if (mode == BoundaryMode::field && h > 0)
      for (int b : g.boundary) e += c.beta * h * s[b];
    double w = std::exp(e);
    out.z += w;
    for (std::size_t o = 0; o < obs.size(); ++o) {
      double p = w;
      for (int v : obs[o].vertices) p *= s[v];
      out.sums[o] += p;
    }
  }
  double norm = std::ldexp(1.0, -nf);
  out.z *= norm;
  for (auto& v : out.sums) v *= norm;
  return out;
}

namespace {

double series_walk(const WeightedGraph& g, int bond, double w,
                   std::vector<int>& degree_parity, SourceMask target, int max_label) {
  if (bond == g.total_bonds()) {
    SourceMask par = 0;
    for (int v = 0; v <= g.n; ++v)
      if (degree_parity[v] & 1) par |= SourceMask(1) << v;
    return par == target ? w : 0.0;
  }
  auto [u, v] = g.bond_ends(bond);
  double k = g.bond_k(bond);
  double total = 0;
  double factor = 1.0;  // k^l / l!
  for (int l = 0; l <= max_label; ++l) {
    if (l > 0) factor *= k / l;
    degree_parity[u] += l;
    degree_parity[v] += l;
    total += series_walk(g, bond + 1, w * factor, degree_parity, target, max_label);
    degree_parity[u] -= l;
    degree_parity[v] -= l;
  }
  return total;
}

}  // namespace

double current_partition_series(const WeightedGraph& g, SourceMask sources, int max_label) {
  if (g.total_bonds() > 6)
    throw std::invalid_argument("current_partition_series: too many bonds");
  std::vector<int> parity(g.n + 1, 0);
  return series_walk(g, 0, 1.0, parity, sources, max_label);
}

double theta_naive(const BallGeometry& g, const CouplingSpec& c, double p,
                   std::uint64_t samples, std::uint64_t seed) {
  (void)c;
  int n = g.n();
  std::vector<int> origin_pt(g.dim, 0);
  int o = g.index_of(origin_pt);
  std::vector<std::vector<int>> adj(n);
  std::uint64_t hits = 0;
  std::vector<char> seen(n);
  for (std::uint64_t cfg = 0; cfg < samples; ++cfg) {
    Rng rng(seed, cfg);
    for (auto& a : adj) a.clear();
    for (auto& b : g.bonds) {
      if (rng.u01() < p * b.j) {
        adj[b.u].push_back(b.v);
        adj[b.v].push_back(b.u);
      }
    }
    std::fill(seen.begin(), seen.end(), 0);
    std::deque<int> queue{o};
    seen[o] = 1;
    bool reached = false;
    while (!queue.empty() && !reached) {
      int v = queue.front();
      queue.pop_front();
      if (g.on_boundary[v]) reached = true;
      for (int w : adj[v])
        if (!seen[w]) {
          seen[w] = 1;
          queue.push_back(w);
        }
    }
    if (reached) ++hits;
  }
  return double(hits) / double(samples);
}

std::vector<std::vector<int>> ball_points(int dim, double radius) {
  std::vector<std::vector<int>> out;
  int box = int(std::floor(radius));
  std::vector<int> cur(dim, -box - 1);
  // odometer over the box, lexicographic
  std::vector<int> v(dim, -box);
  while (true) {
    if (within_radius(Norm::euclidean, v, radius)) out.push_back(v);
    int i = dim - 1;
    while (i >= 0 && v[i] == box) {
      v[i] = -box;
      --i;
    }
    if (i < 0) break;
    ++v[i];
  }
  (void)cur;
  return out;
}

std::vector<std::vector<int>> shell_points(int dim, double r) {
  std::vector<std::vector<int>> out;
  int box = int(std::floor(r)) + 1;
  std::vector<int> v(dim, -box);
  while (true) {
    if (!within_radius(Norm::euclidean, v, r)) {
      bool adjacent = false;
      for (int i = 0; i < dim && !adjacent; ++i) {
        for (int d : {-1, 1}) {
          v[i] += d;
          if (within_radius(Norm::euclidean, v, r)) adjacent = true;
          v[i] -= d;
          if (adjacent) break;
        }
      }
      if (adjacent) out.push_back(v);
    }
    int i = dim - 1;
    while (i >= 0 && v[i] == box) {
      v[i] = -box;
      --i;
    }
    if (i < 0) break;
    ++v[i];
  }
  return out;
}

}  // namespace onearm::ref
