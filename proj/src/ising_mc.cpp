#include "onearm/ising_mc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "onearm/rng.hpp"

namespace onearm {

Sampler sampler_from_string(const std::string& s) {
  if (s == "single-cluster-flip" || s == "wolff") return Sampler::single_cluster;
  if (s == "full-lattice-cluster-sweep" || s == "sw") return Sampler::full_sweep;
  if (s == "local-flip" || s == "metropolis") return Sampler::local_flip;
  throw std::invalid_argument("unknown sampler: " + s);
}

void ChainConfig::validate() const {
  if (therm < 0 || sweeps <= 0 || stride < 1 || replicas < 1)
    throw std::invalid_argument("chain config: counts must be positive, stride >= 1");
}

IsingModel IsingModel::from_ball(const BallGeometry& g, const CouplingSpec& c,
                                 bool plus_mode) {
  IsingModel m;
  m.n = g.n();
  m.frozen.assign(m.n, 0);
  if (plus_mode) {
    if (g.boundary.empty())
      throw std::invalid_argument("plus boundary requires a nonempty shell");
    for (int b : g.boundary) m.frozen[b] = 1;
  }
  for (auto& b : g.bonds) {
    double k = c.beta * b.j;
    if (k == 0) continue;
    m.bonds.emplace_back(b.u, b.v);
    m.k.push_back(k);
    m.p_add.push_back(1.0 - std::exp(-2.0 * k));
  }
  std::vector<int> deg(m.n, 0);
  for (auto& [u, v] : m.bonds) {
    ++deg[u];
    ++deg[v];
  }
  m.adj_off.assign(m.n + 1, 0);
  for (int v = 0; v < m.n; ++v) m.adj_off[v + 1] = m.adj_off[v] + deg[v];
  m.adj_vertex.assign(m.adj_off[m.n], 0);
  m.adj_bond.assign(m.adj_off[m.n], 0);
  std::vector<int> fill(m.n, 0);
  for (int b = 0; b < int(m.bonds.size()); ++b) {
    auto [u, v] = m.bonds[b];
    int pu = m.adj_off[u] + fill[u]++;
    int pv = m.adj_off[v] + fill[v]++;
    m.adj_vertex[pu] = v;
    m.adj_bond[pu] = b;
    m.adj_vertex[pv] = u;
    m.adj_bond[pv] = b;
  }
  for (int v = 0; v < m.n; ++v)
    if (!m.frozen[v]) m.free_list.push_back(v);
  std::vector<int> origin_pt(g.dim, 0);
  m.origin = g.index_of(origin_pt);
  return m;
}

namespace {

struct UfScratch {
  std::vector<int> parent;
  void init(int n) {
    parent.resize(n);
    for (int i = 0; i < n; ++i) parent[i] = i;
  }
  int find(int v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[a] = b;
  }
};

void metropolis_sweep(const IsingModel& m, std::vector<signed char>& s, Rng& rng) {
  for (int v : m.free_list) {
    double field = 0;
    for (int e = m.adj_off[v]; e < m.adj_off[v + 1]; ++e)
      field += m.k[m.adj_bond[e]] * s[m.adj_vertex[e]];
    double dlogw = -2.0 * s[v] * field;
    if (dlogw >= 0 || rng.u01() < std::exp(dlogw)) s[v] = -s[v];
  }
}

// One cluster grown from a random free seed.  A bond activated into the
// frozen shell pins the cluster: the flip is abandoned (the spins grown so
// far are left untouched).
void wolff_update(const IsingModel& m, std::vector<signed char>& s, Rng& rng,
                  std::vector<int>& stack, std::vector<char>& in_cluster,
                  std::vector<int>& cluster) {
  if (m.free_list.empty()) return;
  int seed = m.free_list[rng.below(m.free_list.size())];
  signed char dir = s[seed];
  stack.clear();
  cluster.clear();
  stack.push_back(seed);
  in_cluster[seed] = 1;
  cluster.push_back(seed);
  bool pinned = false;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int e = m.adj_off[v]; e < m.adj_off[v + 1]; ++e) {
      int w = m.adj_vertex[e];
      if (s[w] != dir) continue;
      if (in_cluster[w]) continue;
      if (rng.u01() >= m.p_add[m.adj_bond[e]]) continue;
      if (m.frozen[w]) {
        pinned = true;
        continue;
      }
      in_cluster[w] = 1;
      cluster.push_back(w);
      stack.push_back(w);
    }
  }
  if (!pinned)
    for (int v : cluster) s[v] = -s[v];
  for (int v : cluster) in_cluster[v] = 0;
}

// Full-lattice cluster sweep: activate aligned bonds, flip each free
// component with probability 1/2, keep components that touch the frozen
// shell.  Activated bonds only join aligned spins, so every component is
// uniform and flipping member-by-member flips the cluster.
void sweep_update(const IsingModel& m, std::vector<signed char>& s, Rng& rng,
                  UfScratch& uf, std::vector<char>& comp_frozen,
                  std::vector<signed char>& comp_decision) {
  uf.init(m.n);
  for (int b = 0; b < int(m.bonds.size()); ++b) {
    auto [u, v] = m.bonds[b];
    if (s[u] != s[v]) continue;
    if (rng.u01() < m.p_add[b]) uf.unite(u, v);
  }
  std::fill(comp_frozen.begin(), comp_frozen.end(), 0);
  for (int v = 0; v < m.n; ++v)
    if (m.frozen[v]) comp_frozen[uf.find(v)] = 1;
  std::fill(comp_decision.begin(), comp_decision.end(), 0);  // 0 undecided, 1 keep, 2 flip
  for (int v = 0; v < m.n; ++v) {
    int root = uf.find(v);
    if (comp_decision[root] == 0)
      comp_decision[root] =
          comp_frozen[root] ? 1 : (signed char)((rng.next() & 1) ? 1 : 2);
    if (comp_decision[root] == 2) s[v] = -s[v];
  }
}

}  // namespace

void run_chain(const IsingModel& m, const ChainConfig& cfg, int replica,
               const std::function<void(const std::vector<signed char>&)>& fn) {
  cfg.validate();
  Rng init_rng(cfg.seed, hash_combine(0x1511, replica));
  Rng rng(cfg.seed, hash_combine(0x2522, replica));

  std::vector<signed char> s(m.n, 1);
  for (int v : m.free_list) s[v] = (init_rng.next() & 1) ? 1 : -1;

  std::vector<int> stack, cluster;
  std::vector<char> in_cluster(m.n, 0), comp_frozen(m.n, 0);
  std::vector<signed char> comp_decision(m.n, 0);
  UfScratch uf;

  auto one_sweep = [&]() {
    switch (cfg.sampler) {
      case Sampler::local_flip: metropolis_sweep(m, s, rng); break;
      case Sampler::single_cluster: wolff_update(m, s, rng, stack, in_cluster, cluster); break;
      case Sampler::full_sweep: sweep_update(m, s, rng, uf, comp_frozen, comp_decision); break;
    }
  };

  for (int t = 0; t < cfg.therm; ++t) one_sweep();
  for (int t = 0; t < cfg.sweeps; ++t) {
    one_sweep();
    if ((t + 1) % cfg.stride == 0) fn(s);
  }
}

namespace {

// Measure one scalar time series per replica, merge replica estimates.
Estimate replicated_scalar(const IsingModel& m, const ChainConfig& cfg,
                           const std::function<double(const std::vector<signed char>&)>& obs) {
  std::vector<Estimate> parts((std::size_t)cfg.replicas);
#pragma omp parallel for schedule(dynamic)
  for (int rep = 0; rep < cfg.replicas; ++rep) {
    std::vector<double> series;
    series.reserve(cfg.sweeps / cfg.stride + 1);
    run_chain(m, cfg, rep,
              [&](const std::vector<signed char>& s) { series.push_back(obs(s)); });
    Estimate e = blocked_estimate(series);
    if (e.tau > 0 && double(series.size()) < 20.0 * e.tau) e.warn_thermalization = true;
    parts[rep] = e;
  }
  return merge_estimates(parts);
}

}  // namespace

Estimate estimate_one_arm_plus(const BallGeometry& g, const CouplingSpec& c,
                               const ChainConfig& cfg) {
  cfg.validate();
  if (!(c.beta > 0)) throw std::invalid_argument("one-arm estimate needs beta > 0");
  IsingModel m = IsingModel::from_ball(g, c, true);
  if (m.origin < 0) throw std::invalid_argument("origin not inside the ball");
  int o = m.origin;
  return replicated_scalar(m, cfg,
                           [o](const std::vector<signed char>& s) { return double(s[o]); });
}

std::vector<Estimate> estimate_two_point_grouped(
    const BallGeometry& g, const CouplingSpec& c, const ChainConfig& cfg,
    const std::vector<std::vector<std::pair<std::vector<int>, std::vector<int>>>>& groups,
    double r_margin) {
  cfg.validate();
  IsingModel m = IsingModel::from_ball(g, c, false);
  // resolve pairs to indices, enforcing the finite-size margin
  std::vector<std::vector<std::pair<int, int>>> idx_groups;
  for (auto& group : groups) {
    std::vector<std::pair<int, int>> ids;
    for (auto& [a, b] : group) {
      int ia = g.index_of(a), ib = g.index_of(b);
      if (ia < 0 || ib < 0)
        throw std::invalid_argument("two-point pair outside the ball");
      double na = norm_value(g.norm, a), nb = norm_value(g.norm, b);
      if (r_margin * std::max(na, nb) > g.radius_outer)
        throw std::invalid_argument(
            "two-point pair too close to the ball edge for the requested margin");
      ids.emplace_back(ia, ib);
    }
    idx_groups.push_back(std::move(ids));
  }

  std::size_t ng = idx_groups.size();
  std::vector<std::vector<Estimate>> parts(ng, std::vector<Estimate>((std::size_t)cfg.replicas));
#pragma omp parallel for schedule(dynamic)
  for (int rep = 0; rep < cfg.replicas; ++rep) {
    std::vector<std::vector<double>> series(ng);
    run_chain(m, cfg, rep, [&](const std::vector<signed char>& s) {
      for (std::size_t gi = 0; gi < ng; ++gi) {
        double acc = 0;
        for (auto& [ia, ib] : idx_groups[gi]) acc += double(s[ia]) * double(s[ib]);
        series[gi].push_back(acc / double(idx_groups[gi].size()));
      }
    });
    for (std::size_t gi = 0; gi < ng; ++gi) {
      Estimate e = blocked_estimate(series[gi]);
      if (e.tau > 0 && double(series[gi].size()) < 20.0 * e.tau)
        e.warn_thermalization = true;
      parts[gi][rep] = e;
    }
  }
  std::vector<Estimate> out;
  for (std::size_t gi = 0; gi < ng; ++gi) out.push_back(merge_estimates(parts[gi]));
  return out;
}

std::vector<Estimate> estimate_two_point(const BallGeometry& g, const CouplingSpec& c,
                                         const ChainConfig& cfg,
                                         const std::vector<std::pair<std::vector<int>,
                                                                     std::vector<int>>>& pairs,
                                         double r_margin) {
  std::vector<std::vector<std::pair<std::vector<int>, std::vector<int>>>> groups;
  for (auto& p : pairs) groups.push_back({p});
  return estimate_two_point_grouped(g, c, cfg, groups, r_margin);
}

TasakiReport tasaki_check(const std::vector<std::pair<double, Estimate>>& one_arm_by_r,
                          const std::vector<std::pair<double, Estimate>>& two_point_by_x,
                          double coupling_range) {
  TasakiReport report;
  for (auto& [xn, g2] : two_point_by_x) {
    if (xn < 3.0 * coupling_range) continue;
    double target_r = xn / 3.0;
    for (auto& [r, arm] : one_arm_by_r) {
      if (std::fabs(r - target_r) > 1e-9) continue;
      TasakiRow row;
      row.x_norm = xn;
      row.r = r;
      row.lhs = arm;
      double gmean = std::max(g2.mean, 0.0);
      row.rhs = std::sqrt(gmean);
      row.rhs_err = gmean > 0 ? 0.5 * g2.std_err / std::sqrt(gmean) : g2.std_err;
      double sigma = std::sqrt(arm.std_err * arm.std_err + row.rhs_err * row.rhs_err);
      row.margin_sigma = sigma > 0 ? (arm.mean - row.rhs) / sigma
                                   : (arm.mean >= row.rhs ? 0.0 : -1e9);
      row.violation = row.margin_sigma < -3.0;
      report.any_violation = report.any_violation || row.violation;
      report.rows.push_back(row);
    }
  }
  if (report.rows.empty())
    throw std::invalid_argument("tasaki_check: no matching (r, x) pairs");
  return report;
}

}  // namespace onearm
