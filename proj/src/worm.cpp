#include "onearm/worm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "onearm/rng.hpp"

namespace onearm {

void WormConfig::validate() const {
  if (!(p_bond > 0) || !(p_bond <= 1))
    throw std::invalid_argument("worm config: p_bond must be in (0, 1]");
  if (steps == 0) throw std::invalid_argument("worm config: steps must be positive");
  if (stride < 1 || replicas < 1)
    throw std::invalid_argument("worm config: stride and replicas must be >= 1");
}

WormChain::WormChain(const WeightedGraph& g, SourceMask sources, std::uint64_t seed,
                     std::uint64_t stream)
    : g_(g), rng_(seed, stream) {
  int nb = g.total_bonds();
  labels_.assign(nb, 0);
  n_sites_ = g.n + (g.ghost.empty() ? 0 : 1);
  adj_.assign(n_sites_, {});
  for (int b = 0; b < nb; ++b) {
    auto [u, v] = g.bond_ends(b);
    adj_[u].emplace_back(b, v);
    adj_[v].emplace_back(b, u);
  }

  // initial state: pair the requested sources along shortest paths
  std::vector<int> src;
  for (int v = 0; v < n_sites_; ++v)
    if ((sources >> v) & 1) src.push_back(v);
  if (sources >> n_sites_)
    throw std::invalid_argument("worm: source set outside the graph");
  if (src.size() % 2 != 0)
    throw std::invalid_argument("worm: source set has odd size (parity-impossible)");

  auto path_between = [&](int a, int b) {
    std::vector<int> prev_bond(n_sites_, -1), prev_vertex(n_sites_, -1);
    std::vector<char> seen(n_sites_, 0);
    std::deque<int> queue{a};
    seen[a] = 1;
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      if (v == b) break;
      for (auto& [bond, w] : adj_[v])
        if (!seen[w]) {
          seen[w] = 1;
          prev_bond[w] = bond;
          prev_vertex[w] = v;
          queue.push_back(w);
        }
    }
    if (!seen[b])
      throw std::invalid_argument("worm: unreachable source set");
    for (int v = b; v != a; v = prev_vertex[v]) ++labels_[prev_bond[v]];
  };
  for (std::size_t i = 0; i + 1 < src.size(); i += 2) path_between(src[i], src[i + 1]);

  head_ = tail_ = src.empty() ? 0 : src[0];
}

SupportMask WormChain::support_mask() const {
  if (labels_.size() > 32) throw std::invalid_argument("support_mask: too many bonds");
  SupportMask m = 0;
  for (std::size_t b = 0; b < labels_.size(); ++b)
    if (labels_[b] > 0) m |= SupportMask(1) << b;
  return m;
}

void WormChain::step() {
  if (rng_.u01() < p_bond_) {
    auto& adj = adj_[head_];
    if (adj.empty()) return;
    auto [bond, to] = adj[rng_.below(adj.size())];
    bool up = rng_.next() & 1;
    std::uint32_t n = labels_[bond];
    if (!up && n == 0) return;
    double k = g_.bond_k(bond);
    double ratio = up ? k / double(n + 1) : double(n) / k;
    ratio *= double(adj.size()) / double(adj_[to].size());
    if (ratio >= 1.0 || rng_.u01() < ratio) {
      labels_[bond] = up ? n + 1 : n - 1;
      head_ = to;
      ++accepted_;
    }
  } else {
    if (head_ == tail_) {
      int v = int(rng_.below(std::uint64_t(n_sites_)));
      head_ = tail_ = v;
      ++accepted_;
    }
  }
}

std::uint64_t worm_sample(const WeightedGraph& g, SourceMask sources, const WormConfig& cfg,
                          int replica,
                          const std::function<void(const WormChain&)>& fn) {
  cfg.validate();
  WormChain chain(g, sources, cfg.seed, hash_combine(0x3731, replica));
  std::uint64_t burnin = cfg.burnin ? cfg.burnin
                                    : std::max<std::uint64_t>(10000, 50ull * g.total_bonds());
  for (std::uint64_t t = 0; t < burnin; ++t) chain.step();
  std::uint64_t diag_seen = 0, emitted = 0;
  for (std::uint64_t t = 0; t < cfg.steps; ++t) {
    chain.step();
    if (chain.diagonal()) {
      ++diag_seen;
      if (diag_seen % std::uint64_t(cfg.stride) == 0) {
        fn(chain);
        ++emitted;
      }
    }
  }
  return emitted;
}

SecondMomentStats second_moment_stats(const BallGeometry& g, const CouplingSpec& c,
                                      double h, const WormConfig& cfg) {
  cfg.validate();
  if (!(h > 0))
    throw std::invalid_argument("second_moment_stats: needs h > 0 for the sourced chain");
  WeightedGraph gh = current_graph(g, c, h);
  WeightedGraph gf = current_graph(g, c, 0.0);
  std::vector<int> origin_pt(g.dim, 0);
  int o = g.index_of(origin_pt);
  if (o < 0) throw std::invalid_argument("second_moment_stats: origin not in ball");
  SourceMask og = (SourceMask(1) << o) ^ (SourceMask(1) << gh.ghost_vertex());

  struct Rep {
    double m1 = 0, m2 = 0, ratio = 0;
  };
  std::vector<Rep> reps((std::size_t)cfg.replicas);

#pragma omp parallel for schedule(dynamic)
  for (int rep = 0; rep < cfg.replicas; ++rep) {
    // Chain a: sourced sector, conditional law of n given sources {o, ghost}.
    // Chain b: free system.  Chain c: unsourced chain on the field graph
    // whose defect-sector statistics give the 1-spin expectation, which
    // weights the conditional moments back to the sums the bound needs.
    WormChain a(gh, og, cfg.seed, hash_combine(0x4201, rep));
    WormChain b(gf, 0, cfg.seed, hash_combine(0x4202, rep));
    WormChain c(gh, 0, cfg.seed, hash_combine(0x4203, rep));
    std::uint64_t burnin =
        cfg.burnin ? cfg.burnin : std::max<std::uint64_t>(10000, 50ull * gh.total_bonds());
    for (std::uint64_t t = 0; t < burnin; ++t) a.step();
    for (std::uint64_t t = 0; t < burnin; ++t) b.step();
    for (std::uint64_t t = 0; t < burnin; ++t) c.step();

    // sector statistics for <sigma_o>: diagonal visits vs (o, ghost) defect
    // visits, corrected for the multiplicity of the diagonal class
    int ghost = gh.ghost_vertex();
    int n_sites = g.n() + 1;
    std::uint64_t diag_c = 0, og_c = 0;

    std::vector<double> xs, x2s;
    std::uint64_t diag_a = 0, diag_b = 0;
    std::vector<std::vector<std::uint32_t>> queue_a, queue_b;
    for (std::uint64_t t = 0; t < cfg.steps; ++t) {
      a.step();
      if (a.diagonal()) {
        ++diag_a;
        if (diag_a % std::uint64_t(cfg.stride) == 0) queue_a.push_back(a.labels());
      }
      b.step();
      if (b.diagonal()) {
        ++diag_b;
        if (diag_b % std::uint64_t(cfg.stride) == 0) queue_b.push_back(b.labels());
      }
      c.step();
      if (c.diagonal()) ++diag_c;
      else if ((c.head() == o && c.tail() == ghost) ||
               (c.head() == ghost && c.tail() == o))
        ++og_c;
    }
    std::size_t pairs = std::min(queue_a.size(), queue_b.size());
    int nbulk = int(gh.edges.size());
    std::vector<int> parent(g.n());
    for (std::size_t k = 0; k < pairs; ++k) {
      for (int v = 0; v < g.n(); ++v) parent[v] = v;
      auto find = [&](int v) {
        while (parent[v] != v) {
          parent[v] = parent[parent[v]];
          v = parent[v];
        }
        return v;
      };
      for (int bond = 0; bond < nbulk; ++bond) {
        bool pos = queue_a[k][bond] > 0 || queue_b[k][bond] > 0;
        if (!pos) continue;
        int ru = find(gh.edges[bond].u), rv = find(gh.edges[bond].v);
        if (ru != rv) parent[ru] = rv;
      }
      int ro = find(o);
      int x = 0;
      for (int s : g.boundary)
        if (find(s) == ro) ++x;
      xs.push_back(double(x));
      x2s.push_back(double(x) * double(x));
    }
    Estimate c1 = blocked_estimate(xs);
    Estimate c2 = blocked_estimate(x2s);
    double sigma_o = diag_c > 0 ? double(n_sites) * double(og_c) / (2.0 * double(diag_c))
                                : 0.0;
    Rep r;
    r.m1 = sigma_o * c1.mean;
    r.m2 = sigma_o * c2.mean;
    r.ratio = r.m2 > 0 ? r.m1 * r.m1 / r.m2 : 0.0;
    reps[rep] = r;
  }

  SecondMomentStats out;
  std::vector<double> m1s, m2s, ratios;
  for (auto& r : reps) {
    m1s.push_back(r.m1);
    m2s.push_back(r.m2);
    ratios.push_back(r.ratio);
  }
  out.m1 = from_replicates(m1s);
  out.m2 = from_replicates(m2s);
  out.ratio = from_replicates(ratios);
  return out;
}

}  // namespace onearm
