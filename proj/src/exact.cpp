#include "onearm/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "onearm/errors.hpp"

namespace onearm {

WeightedGraph current_graph(const BallGeometry& g, const CouplingSpec& c, double h) {
  if (h < 0) throw std::invalid_argument("current_graph: h must be nonnegative");
  WeightedGraph w;
  w.n = g.n();
  for (auto& b : g.bonds) w.edges.push_back({b.u, b.v, c.beta * b.j});
  if (h > 0)
    for (int v : g.boundary) w.ghost.emplace_back(v, c.beta * h);
  return w;
}

SourceMask source_mask(const WeightedGraph& g, std::span<const int> vertices) {
  SourceMask m = 0;
  for (int v : vertices) {
    if (v < 0 || v > g.n)
      throw std::invalid_argument("source_mask: vertex out of range");
    m ^= SourceMask(1) << v;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Spin enumeration
// ---------------------------------------------------------------------------

namespace {

struct SpinModel {
  int n_free = 0;
  std::vector<int> free_vertex;        // free slot -> vertex index
  std::vector<int> slot_of;            // vertex -> free slot or -1
  std::vector<double> local_field;     // per free slot: frozen neighbors + field
  std::vector<std::vector<std::pair<int, double>>> free_adj;  // slot -> (slot, k)
  double const_energy = 0;             // frozen-frozen bonds
};

SpinModel make_spin_model(const BallGeometry& g, const CouplingSpec& c,
                          BoundaryMode mode, double h) {
  if (mode == BoundaryMode::field && !(h >= 0))
    throw std::invalid_argument("spin enumeration: field must be nonnegative");
  SpinModel m;
  int n = g.n();
  std::vector<char> frozen(n, 0);
  if (mode == BoundaryMode::plus)
    for (int b : g.boundary) frozen[b] = 1;

  m.slot_of.assign(n, -1);
  for (int v = 0; v < n; ++v) {
    if (frozen[v]) continue;
    m.slot_of[v] = m.n_free;
    m.free_vertex.push_back(v);
    ++m.n_free;
  }
  m.local_field.assign(m.n_free, 0.0);
  m.free_adj.assign(m.n_free, {});

  if (mode == BoundaryMode::field && h > 0)
    for (int b : g.boundary) m.local_field[m.slot_of[b]] += c.beta * h;

  for (auto& b : g.bonds) {
    double k = c.beta * b.j;
    if (k == 0) continue;
    bool fu = frozen[b.u], fv = frozen[b.v];
    if (fu && fv) {
      m.const_energy += k;  // both spins +1
    } else if (fu) {
      m.local_field[m.slot_of[b.v]] += k;
    } else if (fv) {
      m.local_field[m.slot_of[b.u]] += k;
    } else {
      int su = m.slot_of[b.u], sv = m.slot_of[b.v];
      m.free_adj[su].emplace_back(sv, k);
      m.free_adj[sv].emplace_back(su, k);
    }
  }
  return m;
}

}  // namespace

SpinSums spin_sums(const BallGeometry& g, const CouplingSpec& c, BoundaryMode mode,
                   double h, const std::vector<SpinObservable>& obs,
                   int budget_vertices, ExecPolicy policy) {
  SpinModel m = make_spin_model(g, c, mode, h);
  if (m.n_free > budget_vertices)
    throw BudgetError("spin enumeration: " + std::to_string(m.n_free) +
                      " free vertices exceed budget " + std::to_string(budget_vertices));

  // observables as free-slot lists plus the constant sign from frozen spins
  int nobs = int(obs.size());
  std::vector<std::vector<int>> slots(nobs);
  for (int i = 0; i < nobs; ++i) {
    for (int v : obs[i].vertices) {
      if (v < 0 || v >= g.n())
        throw std::invalid_argument("spin observable vertex out of range");
      int s = m.slot_of[v];
      if (s >= 0) slots[i].push_back(s);
      // frozen spins contribute the constant factor +1
    }
  }

  std::uint64_t total = std::uint64_t(1) << m.n_free;
  std::uint64_t n_chunks = total <= 4096 ? 1 : std::min<std::uint64_t>(256, total / 4096);
  std::uint64_t chunk_len = total / n_chunks;

  int width = nobs + 1;
  std::vector<double> partial(n_chunks * width, 0.0);

  auto run_chunk = [&](std::uint64_t chunk) {
    std::uint64_t begin = chunk * chunk_len;
    std::uint64_t end = (chunk + 1 == n_chunks) ? total : begin + chunk_len;
    std::uint64_t gray = begin ^ (begin >> 1);

    std::vector<double> s(m.n_free);
    for (int i = 0; i < m.n_free; ++i) s[i] = (gray >> i) & 1 ? -1.0 : 1.0;
    double energy = m.const_energy;
    for (int i = 0; i < m.n_free; ++i) {
      energy += m.local_field[i] * s[i];
      for (auto& [j, k] : m.free_adj[i])
        if (j > i) energy += k * s[i] * s[j];
    }

    double* acc = partial.data() + chunk * width;
    for (std::uint64_t idx = begin;; ++idx) {
      double w = std::exp(energy);
      acc[0] += w;
      for (int o = 0; o < nobs; ++o) {
        double p = w;
        for (int sl : slots[o]) p *= s[sl];
        acc[1 + o] += p;
      }
      if (idx + 1 == end) break;
      int flip = std::countr_zero(idx + 1);
      double sv = s[flip];
      double dE = m.local_field[flip];
      for (auto& [j, k] : m.free_adj[flip]) dE += k * s[j];
      energy -= 2.0 * sv * dE;
      s[flip] = -sv;
    }
  };

  if (policy == ExecPolicy::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long long chunk = 0; chunk < (long long)n_chunks; ++chunk)
      run_chunk(std::uint64_t(chunk));
  } else {
    for (std::uint64_t chunk = 0; chunk < n_chunks; ++chunk) run_chunk(chunk);
  }

  // fixed pairwise reduction over chunks
  SpinSums out;
  out.sums.assign(nobs, 0.0);
  std::vector<double> column(n_chunks);
  double norm = std::ldexp(1.0, -m.n_free);  // 1/2^{free}
  for (int j = 0; j < width; ++j) {
    for (std::uint64_t chunkId = 0; chunkId < n_chunks; ++chunkId)
      column[chunkId] = partial[chunkId * width + j];
    double v = pairwise_sum(column.data(), n_chunks) * norm;
    if (j == 0) out.z = v;
    else out.sums[j - 1] = v;
  }
  return out;
}

double spin_partition(const BallGeometry& g, const CouplingSpec& c, double h,
                      int budget_vertices, ExecPolicy policy) {
  return spin_sums(g, c, h > 0 ? BoundaryMode::field : BoundaryMode::free_bc, h, {},
                   budget_vertices, policy).z;
}

double spin_expectation(const BallGeometry& g, const CouplingSpec& c, BoundaryMode mode,
                        double h, const SpinObservable& obs, int budget_vertices,
                        ExecPolicy policy) {
  SpinSums s = spin_sums(g, c, mode, h, {obs}, budget_vertices, policy);
  return s.sums[0] / s.z;
}

// ---------------------------------------------------------------------------
// Current enumeration
// ---------------------------------------------------------------------------

namespace {

struct BondTables {
  int nb = 0;
  std::vector<SourceMask> flip;   // parity flip mask per bond
  std::vector<double> w_even;     // cosh(k)
  std::vector<double> w_odd;      // sinh(k)
  std::vector<double> w_even_pos; // cosh(k) - 1
};

BondTables bond_tables(const WeightedGraph& g) {
  BondTables t;
  t.nb = g.total_bonds();
  for (int b = 0; b < t.nb; ++b) {
    auto [u, v] = g.bond_ends(b);
    double k = g.bond_k(b);
    t.flip.push_back((SourceMask(1) << u) ^ (SourceMask(1) << v));
    t.w_even.push_back(std::cosh(k));
    t.w_odd.push_back(std::sinh(k));
    t.w_even_pos.push_back(std::cosh(k) - 1.0);
  }
  return t;
}

void check_sources(const WeightedGraph& g, SourceMask sources) {
  SourceMask allowed = (SourceMask(1) << (g.n + 1)) - 1;
  if (sources & ~allowed)
    throw std::invalid_argument("sources outside the vertex set");
  if (g.ghost.empty() && (sources >> g.n) & 1)
    throw std::invalid_argument("ghost source requires ghost bonds (h > 0)");
}

// depth-first two-state walk: each bond is even (cosh) or odd (sinh)
void parity_walk(const BondTables& t, int b, double w, SourceMask par,
                 SourceMask target, double& acc) {
  if (b == t.nb) {
    if (par == target) acc += w;
    return;
  }
  parity_walk(t, b + 1, w * t.w_even[b], par, target, acc);
  parity_walk(t, b + 1, w * t.w_odd[b], par ^ t.flip[b], target, acc);
}

// three-state walk aggregating weight per support mask
void support_walk(const BondTables& t, int b, double w, SourceMask par,
                  SupportMask sup, SourceMask target, double* acc) {
  if (b == t.nb) {
    if (par == target) acc[sup] += w;
    return;
  }
  support_walk(t, b + 1, w, par, sup, target, acc);
  support_walk(t, b + 1, w * t.w_even_pos[b], par, sup | (SupportMask(1) << b), target, acc);
  support_walk(t, b + 1, w * t.w_odd[b], par ^ t.flip[b], sup | (SupportMask(1) << b),
               target, acc);
}

}  // namespace

double current_partition(const WeightedGraph& g, SourceMask sources, int budget_bonds,
                         ExecPolicy policy) {
  check_sources(g, sources);
  BondTables t = bond_tables(g);
  if (t.nb > budget_bonds)
    throw BudgetError("current enumeration: " + std::to_string(t.nb) +
                      " bonds exceed budget " + std::to_string(budget_bonds));
  if (std::popcount(sources) % 2 != 0) return 0.0;  // parity obstruction

  // split on the first `depth` bonds for a fixed chunked reduction
  int depth = t.nb >= 10 ? 5 : 0;
  std::uint64_t n_chunks = 1;
  for (int i = 0; i < depth; ++i) n_chunks *= 2;
  std::vector<double> partial(n_chunks, 0.0);

  auto run_chunk = [&](std::uint64_t chunk) {
    double w = 1.0;
    SourceMask par = 0;
    for (int b = 0; b < depth; ++b) {
      if ((chunk >> b) & 1) {
        w *= t.w_odd[b];
        par ^= t.flip[b];
      } else {
        w *= t.w_even[b];
      }
    }
    parity_walk(t, depth, w, par, sources, partial[chunk]);
  };

  if (policy == ExecPolicy::parallel && depth > 0) {
#pragma omp parallel for schedule(dynamic)
    for (long long chunkId = 0; chunkId < (long long)n_chunks; ++chunkId)
      run_chunk(std::uint64_t(chunkId));
  } else {
    for (std::uint64_t chunkId = 0; chunkId < n_chunks; ++chunkId) run_chunk(chunkId);
  }
  return pairwise_sum(partial.data(), n_chunks);
}

std::vector<double> current_support_weights(const WeightedGraph& g, SourceMask sources,
                                            int budget_bonds, ExecPolicy policy) {
  check_sources(g, sources);
  BondTables t = bond_tables(g);
  if (t.nb > budget_bonds || t.nb > 26)
    throw BudgetError("support enumeration: " + std::to_string(t.nb) +
                      " bonds exceed budget " + std::to_string(std::min(budget_bonds, 26)));
  std::size_t n_masks = std::size_t(1) << t.nb;
  std::vector<double> weights(n_masks, 0.0);
  if (std::popcount(sources) % 2 != 0) return weights;

  // chunk over the first `depth` bonds; per-chunk table memory caps the depth
  int depth = 0;
  if (t.nb >= 8) {
    auto fits = [&](int d) {
      std::uint64_t chunks = 1;
      for (int i = 0; i < d; ++i) chunks *= 3;
      return chunks * n_masks * 8 <= (std::uint64_t(256) << 20);
    };
    for (int d : {3, 2, 1})
      if (fits(d)) {
        depth = d;
        break;
      }
  }
  std::uint64_t n_chunks = 1;
  for (int i = 0; i < depth; ++i) n_chunks *= 3;

  std::vector<std::vector<double>> partial(n_chunks);

  auto run_chunk = [&](std::uint64_t chunk) {
    auto& acc = partial[chunk];
    acc.assign(n_masks, 0.0);
    double w = 1.0;
    SourceMask par = 0;
    SupportMask sup = 0;
    std::uint64_t c = chunk;
    for (int b = 0; b < depth; ++b) {
      int st = int(c % 3);
      c /= 3;
      if (st == 1) {
        w *= t.w_even_pos[b];
        sup |= SupportMask(1) << b;
      } else if (st == 2) {
        w *= t.w_odd[b];
        par ^= t.flip[b];
        sup |= SupportMask(1) << b;
      }
    }
    support_walk(t, depth, w, par, sup, sources, acc.data());
  };

  if (policy == ExecPolicy::parallel && depth > 0) {
#pragma omp parallel for schedule(dynamic)
    for (long long chunkId = 0; chunkId < (long long)n_chunks; ++chunkId)
      run_chunk(std::uint64_t(chunkId));
  } else {
    for (std::uint64_t chunkId = 0; chunkId < n_chunks; ++chunkId) run_chunk(chunkId);
  }

  // pairwise merge in fixed chunk order
  std::vector<double> column(n_chunks);
  for (std::size_t m = 0; m < n_masks; ++m) {
    for (std::uint64_t chunkId = 0; chunkId < n_chunks; ++chunkId)
      column[chunkId] = partial[chunkId][m];
    weights[m] = pairwise_sum(column.data(), n_chunks);
  }
  return weights;
}

double current_event_measure(const WeightedGraph& g, SourceMask sources,
                             const std::function<bool(SupportMask)>& event,
                             int budget_bonds, ExecPolicy policy) {
  auto weights = current_support_weights(g, sources, budget_bonds, policy);
  Kahan acc;
  for (std::size_t m = 0; m < weights.size(); ++m)
    if (weights[m] != 0.0 && event(SupportMask(m))) acc.add(weights[m]);
  return acc.value();
}

double current_label_mean(const WeightedGraph& g, SourceMask sources, int bond,
                          int budget_bonds) {
  check_sources(g, sources);
  BondTables t = bond_tables(g);
  if (t.nb > budget_bonds)
    throw BudgetError("current enumeration exceeds budget");
  if (bond < 0 || bond >= t.nb)
    throw std::invalid_argument("current_label_mean: bond out of range");

  // replace the bond factor by sum_n n k^n/n! over even/odd n
  double k = g.bond_k(bond);
  double z = 0, weighted = 0;
  struct Walk {
    const BondTables& t;
    int bond;
    double k_even_n, k_odd_n;  // k*sinh(k), k*cosh(k)
    void go(int b, double w, double wn, SourceMask par, SourceMask target, double& z,
            double& num) {
      if (b == t.nb) {
        if (par == target) {
          z += w;
          num += wn;
        }
        return;
      }
      if (b == bond) {
        go(b + 1, w * t.w_even[b], w * k_even_n, par, target, z, num);
        go(b + 1, w * t.w_odd[b], w * k_odd_n, par ^ t.flip[b], target, z, num);
      } else {
        go(b + 1, w * t.w_even[b], wn * t.w_even[b], par, target, z, num);
        go(b + 1, w * t.w_odd[b], wn * t.w_odd[b], par ^ t.flip[b], target, z, num);
      }
    }
  } walk{t, bond, k * std::sinh(k), k * std::cosh(k)};
  walk.go(0, 1.0, 1.0, 0, sources, z, weighted);
  if (z == 0) throw std::invalid_argument("current_label_mean: empty source class");
  return weighted / z;
}

// ---------------------------------------------------------------------------
// Connectivity helpers
// ---------------------------------------------------------------------------

namespace {

struct TinyUf {
  int parent[70];
  void init(int n) {
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

}  // namespace

bool mask_connected(const WeightedGraph& g, SupportMask support, int a, int b,
                    SourceMask allowed) {
  if (g.n + 1 > 70) throw BudgetError("mask_connected: graph too large");
  auto in = [&](int v) { return (allowed >> v) & 1; };
  if (a == b) return in(a);
  if (!in(a) || !in(b)) return false;
  TinyUf uf;
  uf.init(g.n + 1);
  for (int bond = 0; bond < g.total_bonds(); ++bond) {
    if (!((support >> bond) & 1)) continue;
    auto [u, v] = g.bond_ends(bond);
    if (in(u) && in(v)) uf.unite(u, v);
  }
  return uf.find(a) == uf.find(b);
}

int mask_shell_reach(const WeightedGraph& g, SupportMask support, int origin,
                     std::span<const int> shell) {
  if (g.n + 1 > 70) throw BudgetError("mask_shell_reach: graph too large");
  TinyUf uf;
  uf.init(g.n);
  int nbulk = int(g.edges.size());
  for (int bond = 0; bond < nbulk; ++bond) {
    if (!((support >> bond) & 1)) continue;
    uf.unite(g.edges[bond].u, g.edges[bond].v);
  }
  int ro = uf.find(origin);
  int count = 0;
  for (int x : shell)
    if (uf.find(x) == ro) ++count;
  return count;
}

// ---------------------------------------------------------------------------
// Switching identity
// ---------------------------------------------------------------------------

namespace {

// support weights of the sub-system living on the bonds inside A, emitted in
// the bond-index space of the full graph
std::vector<std::pair<SupportMask, double>> subsystem_weights(
    const WeightedGraph& g, SourceMask a_set, SourceMask m_sources, int budget_bonds) {
  WeightedGraph sub;
  sub.n = g.n;
  std::vector<int> bond_map;  // sub bond -> full bond index
  for (int b = 0; b < int(g.edges.size()); ++b) {
    auto& e = g.edges[b];
    if (((a_set >> e.u) & 1) && ((a_set >> e.v) & 1)) {
      sub.edges.push_back(e);
      bond_map.push_back(b);
    }
  }
  auto weights = current_support_weights(sub, m_sources, budget_bonds);
  std::vector<std::pair<SupportMask, double>> out;
  for (std::size_t m = 0; m < weights.size(); ++m) {
    if (weights[m] == 0.0) continue;
    SupportMask full = 0;
    for (std::size_t i = 0; i < bond_map.size(); ++i)
      if ((m >> i) & 1) full |= SupportMask(1) << bond_map[i];
    out.emplace_back(full, weights[m]);
  }
  return out;
}

}  // namespace

TwoSides verify_switching(const WeightedGraph& g, SourceMask a_set, SourceMask b_sources,
                          int x, int y, const std::function<double(SupportMask)>& f,
                          int budget_bonds) {
  if (x < 0 || x >= g.n || y < 0 || y >= g.n)
    throw std::invalid_argument("verify_switching: x, y must be bulk vertices");
  SourceMask xy = (SourceMask(1) << x) ^ (SourceMask(1) << y);

  TwoSides r;
  {
    auto wn = current_support_weights(g, b_sources, budget_bonds);
    auto wm = subsystem_weights(g, a_set, 0, budget_bonds);
    Kahan acc;
    for (auto& [mmask, mw] : wm)
      for (std::size_t nm = 0; nm < wn.size(); ++nm) {
        if (wn[nm] == 0.0) continue;
        SupportMask u = SupportMask(nm) | mmask;
        if (!mask_connected(g, u, x, y, a_set)) continue;
        acc.add(wn[nm] * mw * f(u));
      }
    r.lhs = acc.value();
  }
  {
    auto wn = current_support_weights(g, b_sources ^ xy, budget_bonds);
    auto wm = subsystem_weights(g, a_set, xy, budget_bonds);
    Kahan acc;
    for (auto& [mmask, mw] : wm)
      for (std::size_t nm = 0; nm < wn.size(); ++nm) {
        if (wn[nm] == 0.0) continue;
        acc.add(wn[nm] * mw * f(SupportMask(nm) | mmask));
      }
    r.rhs = acc.value();
  }
  return r;
}

PairMoments pair_x_moments(const WeightedGraph& with_field, const WeightedGraph& free_graph,
                           int origin, std::span<const int> shell, int budget_bonds) {
  if (with_field.ghost.empty())
    throw std::invalid_argument("pair_x_moments: the field system needs ghost bonds");
  SourceMask og = (SourceMask(1) << origin) ^ (SourceMask(1) << with_field.ghost_vertex());
  auto wn = current_support_weights(with_field, og, budget_bonds);
  auto wm = current_support_weights(free_graph, 0, budget_bonds);

  double zh = current_partition(with_field, 0, budget_bonds);
  double zf = current_partition(free_graph, 0, budget_bonds);

  // free-system masks live on the bulk-bond prefix of the field system's
  // bond index space (identical edge list)
  Kahan s1, s2;
  for (std::size_t mm = 0; mm < wm.size(); ++mm) {
    if (wm[mm] == 0.0) continue;
    for (std::size_t nm = 0; nm < wn.size(); ++nm) {
      if (wn[nm] == 0.0) continue;
      SupportMask u = SupportMask(nm) | SupportMask(mm);
      int xr = mask_shell_reach(with_field, u, origin, shell);
      if (xr == 0) continue;
      double w = wn[nm] * wm[mm];
      s1.add(w * xr);
      s2.add(w * double(xr) * double(xr));
    }
  }
  PairMoments out;
  out.x1 = s1.value() / (zh * zf);
  out.x2 = s2.value() / (zh * zf);
  return out;
}

// ---------------------------------------------------------------------------
// Correlation inequality
// ---------------------------------------------------------------------------

CorrIneq verify_correlation_inequality(const BallGeometry& g, const CouplingSpec& c,
                                       bool plus_mode, double h, int budget_vertices,
                                       ExecPolicy policy) {
  if (g.boundary.empty())
    throw std::invalid_argument("correlation inequality: empty boundary shell");
  std::vector<int> origin_pt(g.dim, 0);
  int o = g.index_of(origin_pt);
  if (o < 0) throw std::invalid_argument("correlation inequality: origin not in ball");

  const auto& shell = g.boundary;
  int ns = int(shell.size());
  int n = g.n();

  // free-boundary pass: pairs (o,u) and (u,x)
  std::vector<SpinObservable> free_obs;
  for (int u = 0; u < n; ++u) free_obs.push_back({{o, u}});
  for (int u = 0; u < n; ++u)
    for (int x : shell) free_obs.push_back({{u, x}});
  SpinSums free_sums = spin_sums(g, c, BoundaryMode::free_bc, 0, free_obs,
                                 budget_vertices, policy);
  auto g_ou = [&](int u) { return free_sums.sums[u] / free_sums.z; };
  auto g_ux = [&](int u, int xi) {
    return free_sums.sums[n + std::size_t(u) * ns + xi] / free_sums.z;
  };

  // field (or plus) pass: origin, shell 1-spin and (u,x,y) 3-spin values
  BoundaryMode mode = plus_mode ? BoundaryMode::plus : BoundaryMode::field;
  std::vector<SpinObservable> field_obs;
  field_obs.push_back({{o}});
  if (!plus_mode) {
    for (int x : shell) field_obs.push_back({{x}});
    for (int u = 0; u < n; ++u)
      for (int xi = 0; xi < ns; ++xi)
        for (int yi = xi; yi < ns; ++yi)
          field_obs.push_back({{u, shell[xi], shell[yi]}});
  } else {
    for (int u = 0; u < n; ++u) field_obs.push_back({{u}});
  }
  SpinSums field_sums = spin_sums(g, c, mode, h, field_obs, budget_vertices, policy);

  auto sigma_o = field_sums.sums[0] / field_sums.z;
  auto sigma_x = [&](int xi) {
    return plus_mode ? 1.0 : field_sums.sums[1 + xi] / field_sums.z;
  };
  auto triple = [&](int u, int xi, int yi) {
    if (plus_mode) return field_sums.sums[1 + u] / field_sums.z;
    if (xi > yi) std::swap(xi, yi);
    std::size_t base = 1 + ns;
    std::size_t per_u = std::size_t(ns) * (ns + 1) / 2;
    std::size_t off = std::size_t(xi) * ns - std::size_t(xi) * (xi - 1) / 2 + (yi - xi);
    return field_sums.sums[base + u * per_u + off] / field_sums.z;
  };

  CorrIneq out;
  out.lhs = sigma_o;

  Kahan num;
  for (int xi = 0; xi < ns; ++xi) num.add(sigma_x(xi) * g_ou(shell[xi]));
  out.numerator = num.value();

  Kahan den1;
  for (int xi = 0; xi < ns; ++xi)
    for (int yi = 0; yi < ns; ++yi)
      den1.add(g_ou(shell[xi]) * g_ux(shell[xi], yi));
  out.den1 = den1.value();

  Kahan den2;
  for (int u = 0; u < n; ++u) {
    double gu = g_ou(u);
    if (gu == 0) continue;
    for (int xi = 0; xi < ns; ++xi) {
      double gx = g_ux(u, xi);
      for (int yi = 0; yi < ns; ++yi)
        den2.add(gu * gx * g_ux(u, yi) * triple(u, xi, yi));
    }
  }
  out.den2 = den2.value();

  double den = out.den1 + out.den2;
  out.rhs = den > 0 ? out.numerator * out.numerator / den : 0.0;
  return out;
}

}  // namespace onearm
