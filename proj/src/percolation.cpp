#include "onearm/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "onearm/errors.hpp"
#include "onearm/rng.hpp"

namespace onearm {

void UnionFind::init(int n) {
  parent.resize(n);
  for (int i = 0; i < n; ++i) parent[i] = i;
}

int UnionFind::find(int v) {
  while (parent[v] != v) {
    parent[v] = parent[parent[v]];
    v = parent[v];
  }
  return v;
}

void UnionFind::unite(int a, int b) {
  a = find(a);
  b = find(b);
  if (a != b) parent[a] = b;
}

void PercState::sample(const BallGeometry& g, double p, Rng& rng) {
  occupied.assign(g.bonds.size(), 0);
  uf.init(g.n());
  for (std::size_t b = 0; b < g.bonds.size(); ++b) {
    if (rng.u01() < p * g.bonds[b].j) {
      occupied[b] = 1;
      uf.unite(g.bonds[b].u, g.bonds[b].v);
    }
  }
}

bool PercState::audit(const BallGeometry& g) {
  int n = g.n();
  std::vector<std::vector<int>> adj(n);
  for (std::size_t b = 0; b < g.bonds.size(); ++b)
    if (occupied[b]) {
      adj[g.bonds[b].u].push_back(g.bonds[b].v);
      adj[g.bonds[b].v].push_back(g.bonds[b].u);
    }
  std::vector<int> label(n, -1);
  for (int start = 0; start < n; ++start) {
    if (label[start] >= 0) continue;
    std::vector<int> stack{start};
    label[start] = start;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int w : adj[v])
        if (label[w] < 0) {
          label[w] = start;
          stack.push_back(w);
        }
    }
  }
  for (int a = 0; a < n; ++a)
    for (int b : adj[a])
      if (uf.find(a) != uf.find(b)) return false;
  for (int a = 0; a < n; ++a) {
    int probe = (a * 7919 + 13) % n;
    if ((label[a] == label[probe]) != (uf.find(a) == uf.find(probe))) return false;
  }
  return true;
}

namespace {

void check_probabilities(const BallGeometry& g, double p) {
  if (p < 0) throw std::invalid_argument("percolation: p must be nonnegative");
  for (auto& b : g.bonds)
    if (p * b.j > 1.0)
      throw std::invalid_argument("percolation: p*J exceeds 1 on a bond");
}

int origin_index(const BallGeometry& g) {
  std::vector<int> origin_pt(g.dim, 0);
  int o = g.index_of(origin_pt);
  if (o < 0) throw std::invalid_argument("percolation: origin not inside the ball");
  return o;
}

// binomial standard error with the usual p(1-p)/n rule
Estimate binomial_estimate(std::uint64_t hits, std::uint64_t n) {
  Estimate e;
  e.count = n;
  if (n == 0) return e;
  double ph = double(hits) / double(n);
  e.mean = ph;
  e.std_err = std::sqrt(std::max(ph * (1.0 - ph), 0.0) / double(n));
  e.tau = 0.5;
  return e;
}

// vertices outside radius r with a geometry bond into the r-ball
std::vector<int> shell_vertices(const BallGeometry& g, double r) {
  int n = g.n();
  std::vector<char> in_ball(n, 0);
  for (int v = 0; v < n; ++v)
    in_ball[v] = within_radius(g.norm, g.point(v), r) ? 1 : 0;
  std::vector<char> is_shell(n, 0);
  for (auto& b : g.bonds) {
    if (in_ball[b.u] != in_ball[b.v]) {
      int out = in_ball[b.u] ? b.v : b.u;
      is_shell[out] = 1;
    }
  }
  std::vector<int> shell;
  for (int v = 0; v < n; ++v)
    if (is_shell[v]) shell.push_back(v);
  return shell;
}

}  // namespace

std::vector<Estimate> sample_theta_nested(const BallGeometry& g, const CouplingSpec& c,
                                          double p, const std::vector<double>& radii,
                                          std::uint64_t samples, std::uint64_t seed,
                                          ExecPolicy policy) {
  (void)c;
  check_probabilities(g, p);
  if (samples == 0) throw std::invalid_argument("percolation: samples must be positive");
  int o = origin_index(g);

  // shell vertex lists per requested radius, from the geometry's own bonds
  std::vector<std::vector<int>> shells;
  for (double r : radii) {
    if (!(r < g.radius_outer))
      throw std::invalid_argument("percolation: nested radius must be below R");
    auto shell = shell_vertices(g, r);
    if (shell.empty()) throw std::invalid_argument("percolation: empty shell");
    shells.push_back(std::move(shell));
  }

  std::size_t nr = radii.size();
  std::vector<std::uint64_t> hits(nr, 0);

#pragma omp parallel if (policy == ExecPolicy::parallel)
  {
    UnionFind uf;
    std::vector<std::uint64_t> local(nr, 0);
#pragma omp for schedule(static)
    for (long long cfg = 0; cfg < (long long)samples; ++cfg) {
      Rng rng(seed, std::uint64_t(cfg));
      uf.init(g.n());
      for (auto& b : g.bonds)
        if (rng.u01() < p * b.j) uf.unite(b.u, b.v);
      int ro = uf.find(o);
      for (std::size_t i = 0; i < nr; ++i) {
        for (int x : shells[i])
          if (uf.find(x) == ro) {
            ++local[i];
            break;
          }
      }
    }
#pragma omp critical
    for (std::size_t i = 0; i < nr; ++i) hits[i] += local[i];
  }

  std::vector<Estimate> out;
  for (std::size_t i = 0; i < nr; ++i) out.push_back(binomial_estimate(hits[i], samples));
  return out;
}

Estimate sample_theta_r(const BallGeometry& g, const CouplingSpec& c, double p,
                        std::uint64_t samples, std::uint64_t seed, ExecPolicy policy) {
  (void)c;
  if (g.boundary.empty()) throw std::invalid_argument("percolation: empty shell");
  check_probabilities(g, p);
  if (samples == 0) throw std::invalid_argument("percolation: samples must be positive");
  int o = origin_index(g);

  std::uint64_t hits = 0;
#pragma omp parallel if (policy == ExecPolicy::parallel)
  {
    PercState state;
    std::uint64_t local = 0;
#pragma omp for schedule(static)
    for (long long cfg = 0; cfg < (long long)samples; ++cfg) {
      Rng rng(seed, std::uint64_t(cfg));
      state.sample(g, p, rng);
      int ro = state.uf.find(o);
      for (int x : g.boundary)
        if (state.uf.find(x) == ro) {
          ++local;
          break;
        }
    }
#pragma omp critical
    hits += local;
  }
  return binomial_estimate(hits, samples);
}

std::vector<Estimate> sample_two_point_perc(const BallGeometry& g, const CouplingSpec& c,
                                            double p,
                                            const std::vector<std::pair<std::vector<int>,
                                                                        std::vector<int>>>& pairs,
                                            std::uint64_t samples, std::uint64_t seed,
                                            ExecPolicy policy) {
  (void)c;
  check_probabilities(g, p);
  if (samples == 0) throw std::invalid_argument("percolation: samples must be positive");
  std::vector<std::pair<int, int>> idx;
  for (auto& [a, b] : pairs) {
    int ia = g.index_of(a), ib = g.index_of(b);
    if (ia < 0 || ib < 0)
      throw std::invalid_argument("percolation: two-point pair outside the ball");
    idx.emplace_back(ia, ib);
  }

  std::vector<std::uint64_t> hits(idx.size(), 0);
#pragma omp parallel if (policy == ExecPolicy::parallel)
  {
    PercState state;
    std::vector<std::uint64_t> local(idx.size(), 0);
#pragma omp for schedule(static)
    for (long long cfg = 0; cfg < (long long)samples; ++cfg) {
      Rng rng(seed, std::uint64_t(cfg));
      state.sample(g, p, rng);
      for (std::size_t i = 0; i < idx.size(); ++i)
        if (state.connected(idx[i].first, idx[i].second)) ++local[i];
    }
#pragma omp critical
    for (std::size_t i = 0; i < idx.size(); ++i) hits[i] += local[i];
  }

  std::vector<Estimate> out;
  for (std::size_t i = 0; i < idx.size(); ++i)
    out.push_back(binomial_estimate(hits[i], samples));
  return out;
}

// ---------------------------------------------------------------------------
// Simulated second-moment check
// ---------------------------------------------------------------------------

namespace {

struct ShellSet {
  std::vector<int> vertices;
};

ShellSet make_shell(const BallGeometry& g, double r) {
  ShellSet s;
  s.vertices = shell_vertices(g, r);
  return s;
}

}  // namespace

std::vector<PercCorrReport> perc_correlation_check(const BallGeometry& g,
                                                   const CouplingSpec& c, double p,
                                                   const std::vector<double>& radii,
                                                   std::uint64_t samples, std::uint64_t seed,
                                                   int blocks, ExecPolicy policy) {
  (void)c;
  check_probabilities(g, p);
  if (blocks < 4) throw std::invalid_argument("percolation: need at least 4 blocks");
  if (samples < std::uint64_t(blocks) * 16)
    throw std::invalid_argument("percolation: too few samples for blocking");
  int o = origin_index(g);
  int n = g.n();

  std::vector<ShellSet> shells;
  std::size_t total_shell = 0;
  for (double r : radii) {
    shells.push_back(make_shell(g, r));
    if (shells.back().vertices.empty())
      throw std::invalid_argument("percolation: empty shell");
    total_shell += shells.back().vertices.size();
  }
  std::size_t nr = radii.size();

  // per-radius slabs of (u, x) connection counters plus G(o, u) counters
  std::vector<std::size_t> slab_off(nr + 1, 0);
  for (std::size_t i = 0; i < nr; ++i)
    slab_off[i + 1] = slab_off[i] + std::size_t(n) * shells[i].vertices.size();

  std::uint64_t per_block = samples / blocks;
  std::vector<std::vector<double>> block_rhs(nr);
  std::vector<std::vector<double>> block_theta(nr);
  std::vector<double> tail_estimate(nr, 0.0);

  std::vector<std::uint32_t> counts(slab_off[nr]);
  std::vector<std::uint32_t> counts_go(n);

  for (int blk = 0; blk < blocks; ++blk) {
    std::fill(counts.begin(), counts.end(), 0);
    std::fill(counts_go.begin(), counts_go.end(), 0);
    std::vector<std::uint64_t> theta_hits(nr, 0);

#pragma omp parallel if (policy == ExecPolicy::parallel)
    {
      UnionFind uf;
      std::vector<std::uint32_t> local(slab_off[nr], 0);
      std::vector<std::uint32_t> local_go(n, 0);
      std::vector<std::uint64_t> local_theta(nr, 0);
      // root -> shell members bucket, versioned to avoid resets
      std::vector<int> bucket_head(n, -1);
      std::vector<int> bucket_version(n, -1);
      std::vector<int> bucket_next;
      int version = -1;

#pragma omp for schedule(static)
      for (long long cfgIdx = 0; cfgIdx < (long long)per_block; ++cfgIdx) {
        std::uint64_t cfg = std::uint64_t(blk) * per_block + std::uint64_t(cfgIdx);
        Rng rng(seed, cfg);
        uf.init(n);
        for (auto& b : g.bonds)
          if (rng.u01() < p * b.j) uf.unite(b.u, b.v);

        int ro = uf.find(o);
        for (int v = 0; v < n; ++v)
          if (uf.find(v) == ro) ++local_go[v];

        for (std::size_t i = 0; i < nr; ++i) {
          ++version;
          bucket_next.assign(shells[i].vertices.size(), -1);
          bool reached = false;
          for (std::size_t xi = 0; xi < shells[i].vertices.size(); ++xi) {
            int root = uf.find(shells[i].vertices[xi]);
            if (root == ro) reached = true;
            if (bucket_version[root] != version) {
              bucket_version[root] = version;
              bucket_head[root] = int(xi);
              bucket_next[xi] = -1;
            } else {
              bucket_next[xi] = bucket_head[root];
              bucket_head[root] = int(xi);
            }
          }
          if (reached) ++local_theta[i];
          std::uint32_t* slab = local.data() + slab_off[i];
          std::size_t ns = shells[i].vertices.size();
          for (int u = 0; u < n; ++u) {
            int root = uf.find(u);
            if (bucket_version[root] != version) continue;
            for (int xi = bucket_head[root]; xi >= 0; xi = bucket_next[xi])
              ++slab[std::size_t(u) * ns + xi];
          }
        }
      }
#pragma omp critical
      {
        for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += local[i];
        for (int v = 0; v < n; ++v) counts_go[v] += local_go[v];
        for (std::size_t i = 0; i < nr; ++i) theta_hits[i] += local_theta[i];
      }
    }

    // assemble the block's plug-in bound per radius
    double inv = 1.0 / double(per_block);
    for (std::size_t i = 0; i < nr; ++i) {
      std::size_t ns = shells[i].vertices.size();
      const std::uint32_t* slab = counts.data() + slab_off[i];
      double num = 0;
      for (std::size_t xi = 0; xi < ns; ++xi) {
        int x = shells[i].vertices[xi];
        num += double(counts_go[x]) * inv;
      }
      double den = 0, den_outer = 0, den_inner_band = 0;
      double band_lo = g.radius_outer / 2.0, band_lo2 = g.radius_outer / 4.0;
      for (int u = 0; u < n; ++u) {
        double gu = double(counts_go[u]) * inv;
        if (gu == 0) continue;
        double t = 0;
        for (std::size_t xi = 0; xi < ns; ++xi)
          t += double(slab[std::size_t(u) * ns + xi]) * inv;
        double term = gu * t * t;
        den += term;
        double un = norm_value(g.norm, g.point(u));
        if (un >= band_lo) den_outer += term;
        else if (un >= band_lo2) den_inner_band += term;
      }
      block_theta[i].push_back(double(theta_hits[i]) * inv);
      block_rhs[i].push_back(den > 0 ? num * num / den : 0.0);
      if (blk == 0 && den_inner_band > 0 && den_outer > 0) {
        // geometric extrapolation of the dyadic band decay past the ball
        double rho = den_outer / den_inner_band;
        tail_estimate[i] = rho < 1.0 ? den_outer * rho / (1.0 - rho) : -1.0;
      }
    }
  }

  std::vector<PercCorrReport> out;
  for (std::size_t i = 0; i < nr; ++i) {
    PercCorrReport rep;
    rep.r = radii[i];
    rep.lhs = from_replicates(block_theta[i]);
    rep.lhs.count = per_block * std::uint64_t(blocks);
    rep.rhs = from_replicates(block_rhs[i]);
    rep.tail_estimate = tail_estimate[i];
    double sigma = std::sqrt(rep.lhs.std_err * rep.lhs.std_err +
                             rep.rhs.std_err * rep.rhs.std_err);
    rep.pass_3sigma = rep.lhs.mean + 3.0 * sigma >= rep.rhs.mean;
    out.push_back(rep);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exact enumeration checks
// ---------------------------------------------------------------------------

namespace {

struct ExactAccum {
  double theta = 0;
  std::vector<double> g_o;
  std::vector<double> g_full;           // n x n
  std::vector<double> two_arm;          // ns x ns: P(o reaches x and y)
};

ExactAccum exact_enumeration(const BallGeometry& g, double p, int budget_bonds) {
  int nb = int(g.bonds.size());
  if (nb > budget_bonds || nb > 26)
    throw BudgetError("percolation enumeration: " + std::to_string(nb) +
                      " bonds exceed budget");
  int n = g.n();
  int o = origin_index(g);
  const auto& shell = g.boundary;
  int ns = int(shell.size());

  ExactAccum acc;
  acc.g_o.assign(n, 0.0);
  acc.g_full.assign(std::size_t(n) * n, 0.0);
  acc.two_arm.assign(std::size_t(ns) * ns, 0.0);

  std::vector<double> occ_p(nb), vac_p(nb);
  for (int b = 0; b < nb; ++b) {
    occ_p[b] = p * g.bonds[b].j;
    vac_p[b] = 1.0 - occ_p[b];
  }

  UnionFind uf;
  for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << nb); ++mask) {
    double w = 1.0;
    for (int b = 0; b < nb; ++b) w *= ((mask >> b) & 1) ? occ_p[b] : vac_p[b];
    if (w == 0) continue;
    uf.init(n);
    for (int b = 0; b < nb; ++b)
      if ((mask >> b) & 1) uf.unite(g.bonds[b].u, g.bonds[b].v);
    int ro = uf.find(o);
    bool reached = false;
    for (int u = 0; u < n; ++u) {
      int ru = uf.find(u);
      if (ru == ro) acc.g_o[u] += w;
      for (int v = u; v < n; ++v)
        if (ru == uf.find(v)) {
          acc.g_full[std::size_t(u) * n + v] += w;
          if (u != v) acc.g_full[std::size_t(v) * n + u] += w;
        }
    }
    for (int xi = 0; xi < ns; ++xi) {
      if (uf.find(shell[xi]) != ro) continue;
      reached = true;
      for (int yi = 0; yi < ns; ++yi)
        if (uf.find(shell[yi]) == ro) acc.two_arm[std::size_t(xi) * ns + yi] += w;
    }
    if (reached) acc.theta += w;
  }
  return acc;
}

}  // namespace

PercExact perc_exact_check(const BallGeometry& g, const CouplingSpec& c, double p,
                           int budget_bonds) {
  (void)c;
  check_probabilities(g, p);
  ExactAccum acc = exact_enumeration(g, p, budget_bonds);
  int n = g.n();
  const auto& shell = g.boundary;

  PercExact out;
  out.theta = acc.theta;
  out.g_origin = acc.g_o;
  out.g.assign(n, std::vector<double>(n));
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v) out.g[u][v] = acc.g_full[std::size_t(u) * n + v];

  double num = 0;
  for (int x : shell) num += acc.g_o[x];
  double den = 0;
  for (int u = 0; u < n; ++u) {
    double t = 0;
    for (int x : shell) t += out.g[u][x];
    den += acc.g_o[u] * t * t;
  }
  out.rhs = den > 0 ? num * num / den : 0.0;
  return out;
}

TreeGraphReport tree_graph_check(const BallGeometry& g, const CouplingSpec& c, double p,
                                 int budget_bonds) {
  (void)c;
  check_probabilities(g, p);
  ExactAccum acc = exact_enumeration(g, p, budget_bonds);
  int n = g.n();
  const auto& shell = g.boundary;
  int ns = int(shell.size());

  TreeGraphReport report;
  report.max_violation = -1e300;
  for (int xi = 0; xi < ns; ++xi)
    for (int yi = xi; yi < ns; ++yi) {
      TreeGraphRow row;
      row.x = shell[xi];
      row.y = shell[yi];
      row.lhs = acc.two_arm[std::size_t(xi) * ns + yi];
      double rhs = 0;
      for (int u = 0; u < n; ++u)
        rhs += acc.g_o[u] * acc.g_full[std::size_t(u) * n + row.x] *
               acc.g_full[std::size_t(u) * n + row.y];
      row.rhs = rhs;
      report.max_violation = std::max(report.max_violation, row.lhs - row.rhs);
      report.rows.push_back(row);
    }
  return report;
}

}  // namespace onearm
