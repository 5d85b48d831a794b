#include "onearm/verify_suite.hpp"

#include <bit>
#include <cmath>

#include "onearm/percolation.hpp"
#include "onearm/rng.hpp"

namespace onearm {

namespace {

double rel_gap(double lhs, double rhs) {
  return std::fabs(lhs - rhs) / std::max({std::fabs(lhs), std::fabs(rhs), 1.0});
}

CheckLine identity_line(const std::string& name, const std::string& anchor, double lhs,
                        double rhs, double tol) {
  CheckLine line;
  line.name = name;
  line.anchor = anchor;
  line.lhs = lhs;
  line.rhs = rhs;
  line.rel_err = rel_gap(lhs, rhs);
  line.pass = line.rel_err <= tol;
  return line;
}

CheckLine inequality_line(const std::string& name, const std::string& anchor, double lhs,
                          double rhs, double slack) {
  CheckLine line;
  line.name = name;
  line.anchor = anchor;
  line.lhs = lhs;
  line.rhs = rhs;
  double violation = rhs - lhs;
  line.rel_err = std::max(violation, 0.0) / std::max({std::fabs(lhs), std::fabs(rhs), 1.0});
  line.pass = violation <= slack * std::max({std::fabs(lhs), std::fabs(rhs), 1.0});
  return line;
}

}  // namespace

SmallInstance make_small_instance(std::uint64_t seed, int index, bool with_field) {
  Rng rng(seed, hash_combine(0x90, index));
  SmallInstance inst;

  double j = 0.3 + 1.0 * rng.u01();
  double beta = 0.2 + 0.8 * rng.u01();
  switch (index % 6) {
    case 0: {
      inst.coupling = CouplingSpec::nearest_neighbor(1, j, beta);
      inst.geometry = build_ball(inst.coupling, 3.0, 1.0);
      break;
    }
    case 1: {
      inst.coupling = CouplingSpec::nearest_neighbor(1, j, beta);
      inst.geometry = build_ball(inst.coupling, 5.0, 2.0);
      break;
    }
    case 2: {
      CouplingSpec c;
      c.dim = 1;
      c.range = 2;
      c.beta = beta;
      c.table.emplace_back(std::vector<int>{1}, j);
      c.table.emplace_back(std::vector<int>{2}, 0.1 + 0.5 * rng.u01());
      c.finalize();
      inst.coupling = c;
      inst.geometry = build_ball(inst.coupling, 2.0, 1.0);
      break;
    }
    case 3: {
      inst.coupling = CouplingSpec::nearest_neighbor(2, j, beta);
      inst.geometry = build_ball(inst.coupling, 1.0, 0.5);
      break;
    }
    case 4: {
      inst.coupling = CouplingSpec::nearest_neighbor(2, j, beta);
      inst.geometry = build_ball(inst.coupling, 1.5, 1.0);
      break;
    }
    default: {
      inst.coupling = CouplingSpec::nearest_neighbor(3, j, beta);
      inst.geometry = build_ball(inst.coupling, 1.0, 0.5);
      break;
    }
  }
  inst.h = with_field ? 0.2 + 1.0 * rng.u01() : 0.0;
  // keep the enumeration small when ghost bonds come in
  if (inst.h > 0 && inst.geometry.bonds.size() + inst.geometry.boundary.size() > 14)
    inst.h = 0.0;
  return inst;
}

std::vector<CheckLine> representation_identity_suite(int count, std::uint64_t seed,
                                                     double tol) {
  std::vector<CheckLine> out;
  for (int i = 0; i < count; ++i) {
    SmallInstance inst = make_small_instance(seed, i, i % 2 == 1);
    WeightedGraph graph = current_graph(inst.geometry, inst.coupling, inst.h);
    std::string tag = "g" + std::to_string(i);

    double z_spin = spin_partition(inst.geometry, inst.coupling, inst.h);
    double z_curr = current_partition(graph, 0);
    out.push_back(identity_line("partition/" + tag, "partition-representation", z_spin,
                                z_curr, tol));

    Rng rng(seed, hash_combine(0x91, i));
    int n = inst.geometry.n();
    int x = int(rng.below(std::uint64_t(n)));
    int y = int(rng.below(std::uint64_t(n)));
    BoundaryMode mode = inst.h > 0 ? BoundaryMode::field : BoundaryMode::free_bc;
    if (inst.h > 0) {
      // 1-spin value against the sourced current sum through the ghost
      double sx = spin_expectation(inst.geometry, inst.coupling, mode, inst.h, {{x}});
      SourceMask src = (SourceMask(1) << x) ^ (SourceMask(1) << graph.ghost_vertex());
      double curr = current_partition(graph, src) / z_curr;
      out.push_back(
          identity_line("one-spin/" + tag, "one-spin-representation", sx, curr, tol));
    } else {
      double sxy = spin_expectation(inst.geometry, inst.coupling, mode, 0.0, {{x, y}});
      SourceMask src = (SourceMask(1) << x) ^ (SourceMask(1) << y);
      double curr = current_partition(graph, src) / z_curr;
      out.push_back(
          identity_line("two-spin/" + tag, "two-point-representation", sxy, curr, tol));
    }
  }
  return out;
}

std::vector<CheckLine> switching_identity_suite(int count, std::uint64_t seed, double tol) {
  std::vector<CheckLine> out;
  for (int i = 0; i < count; ++i) {
    SmallInstance inst = make_small_instance(seed + 1, i, i % 3 == 1);
    WeightedGraph graph = current_graph(inst.geometry, inst.coupling, inst.h);
    Rng rng(seed, hash_combine(0x92, i));
    int n = inst.geometry.n();

    // random A containing at least one vertex
    SourceMask a_set = 0;
    for (int v = 0; v < n; ++v)
      if (rng.u01() < 0.6) a_set |= SourceMask(1) << v;
    if (a_set == 0) a_set = 1;

    // random even-size source set B (ghost allowed when present)
    SourceMask b_set = 0;
    int limit = n + (graph.ghost.empty() ? 0 : 1);
    for (int v = 0; v < limit; ++v)
      if (rng.u01() < 0.3) b_set ^= SourceMask(1) << v;
    if (std::popcount(b_set) % 2 != 0) {
      int v = int(rng.below(std::uint64_t(n)));
      b_set ^= SourceMask(1) << v;
    }

    int x = int(rng.below(std::uint64_t(n)));
    int y = (i % 5 == 0) ? x : int(rng.below(std::uint64_t(n)));
    // the coincident-point convention (x connected to x in A iff x lies in A)
    // makes the identity meaningful for x = y only when x is in A
    if (x == y) a_set |= SourceMask(1) << x;

    std::function<double(SupportMask)> f;
    if (i % 2 == 0) {
      f = [](SupportMask) { return 1.0; };
    } else {
      f = [](SupportMask m) { return double(std::popcount(m) % 7); };
    }
    TwoSides sides = verify_switching(graph, a_set, b_set, x, y, f);
    out.push_back(identity_line("switching/g" + std::to_string(i), "switching-identity",
                                sides.lhs, sides.rhs, tol));
  }
  return out;
}

std::vector<CheckLine> moment_chain_suite(int count, std::uint64_t seed, double tol) {
  std::vector<CheckLine> out;
  for (int i = 0; i < count; ++i) {
    SmallInstance inst = make_small_instance(seed + 2, i, true);
    if (inst.h == 0) inst.h = 0.5;  // this suite needs the sourced system
    if (inst.geometry.bonds.size() + inst.geometry.boundary.size() > 14) continue;
    WeightedGraph gh = current_graph(inst.geometry, inst.coupling, inst.h);
    WeightedGraph gf = current_graph(inst.geometry, inst.coupling, 0.0);
    std::vector<int> origin_pt(inst.geometry.dim, 0);
    int o = inst.geometry.index_of(origin_pt);
    std::string tag = "g" + std::to_string(i);

    PairMoments pm = pair_x_moments(gh, gf, o, inst.geometry.boundary);
    double zh = current_partition(gh, 0);
    double zf = current_partition(gf, 0);
    SourceMask og = (SourceMask(1) << o) ^ (SourceMask(1) << gh.ghost_vertex());
    double sigma_o = current_partition(gh, og) / zh;

    // Cauchy-Schwarz: E[X] <= sqrt(<sigma_o>) sqrt(E[X^2])
    out.push_back(inequality_line("schwarz/" + tag, "schwarz-bound",
                                  std::sqrt(std::max(sigma_o, 0.0) * std::max(pm.x2, 0.0)),
                                  pm.x1, tol));

    // exact rewrite: E[X] = sum_x <sigma_x>_h <sigma_o sigma_x>_free
    Kahan rhs;
    for (int x : inst.geometry.boundary) {
      SourceMask xg = (SourceMask(1) << x) ^ (SourceMask(1) << gh.ghost_vertex());
      double sx = current_partition(gh, xg) / zh;
      double gox = x == o ? 1.0
                          : current_partition(gf, (SourceMask(1) << o) ^
                                                      (SourceMask(1) << x)) /
                                zf;
      rhs.add(sx * gox);
    }
    out.push_back(identity_line("first-moment/" + tag, "first-moment-rewrite", pm.x1,
                                rhs.value(), tol));

    // assembled bound: <sigma_o>_h >= E[X]^2 / E[X^2]
    double bound = pm.x2 > 0 ? pm.x1 * pm.x1 / pm.x2 : 0.0;
    out.push_back(
        inequality_line("moment-bound/" + tag, "second-moment-bound", sigma_o, bound, tol));
  }
  return out;
}

std::vector<CheckLine> correlation_inequality_suite(int budget_vertices) {
  std::vector<CheckLine> out;
  const double slack = 1e-12;
  int idx = 0;
  for (int d : {1, 2}) {
    double radius_outer = d == 1 ? 4.0 : 2.5;
    double radius_inner = d == 1 ? 2.0 : 1.0;
    for (double beta : {0.1, 0.4, 0.8}) {
      CouplingSpec c = CouplingSpec::nearest_neighbor(d, 1.0, beta);
      BallGeometry g = build_ball(c, radius_outer, radius_inner);
      for (int mode = 0; mode < 3; ++mode) {
        bool plus = mode == 2;
        double h = mode == 0 ? 0.2 : (mode == 1 ? 1.0 : 0.0);
        CorrIneq ci = verify_correlation_inequality(g, c, plus, h, budget_vertices);
        std::string name = "corr-ineq/d" + std::to_string(d) + "/b" +
                           std::to_string(beta).substr(0, 3) + "/" +
                           (plus ? "plus" : "h" + std::to_string(h).substr(0, 3));
        out.push_back(
            inequality_line(name, "correlation-inequality", ci.lhs, ci.rhs, slack));
        ++idx;
      }
    }
  }
  // decoupled-bulk edge case: beta = 0 with a field
  {
    CouplingSpec c = CouplingSpec::nearest_neighbor(2, 1.0, 0.0);
    BallGeometry g = build_ball(c, 2.5, 1.0);
    CorrIneq ci = verify_correlation_inequality(g, c, false, 0.7);
    out.push_back(
        inequality_line("corr-ineq/beta0", "correlation-inequality", ci.lhs, ci.rhs, slack));
  }
  // wider shell, longer range
  {
    CouplingSpec c;
    c.dim = 1;
    c.range = 2;
    c.beta = 0.3;
    c.table.emplace_back(std::vector<int>{1}, 1.0);
    c.table.emplace_back(std::vector<int>{2}, 0.5);
    c.finalize();
    BallGeometry g = build_ball(c, 5.0, 2.0);
    CorrIneq ci = verify_correlation_inequality(g, c, false, 0.5);
    out.push_back(
        inequality_line("corr-ineq/range2", "correlation-inequality", ci.lhs, ci.rhs, slack));
  }
  (void)idx;
  return out;
}

std::vector<CheckLine> percolation_exact_suite() {
  std::vector<CheckLine> out;
  struct Case {
    int dim;
    double radius_outer, radius_inner;
  };
  for (auto [dim, radius_outer, radius_inner] :
       {Case{1, 3.0, 1.0}, Case{2, 1.0, 0.5}, Case{2, 1.5, 1.0}, Case{1, 4.0, 2.0}}) {
    CouplingSpec c = CouplingSpec::nearest_neighbor(dim, 1.0, 1.0);
    BallGeometry g = build_ball(c, radius_outer, radius_inner);
    for (double p : {0.2, 0.5, 0.8}) {
      std::string tag = "d" + std::to_string(dim) + "R" +
                        std::to_string(radius_outer).substr(0, 3) + "p" +
                        std::to_string(p).substr(0, 3);
      TreeGraphReport tree = tree_graph_check(g, c, p);
      CheckLine tl;
      tl.name = "tree-graph/" + tag;
      tl.anchor = "tree-graph-inequality";
      tl.lhs = tree.max_violation;
      tl.rhs = 0.0;
      tl.rel_err = std::max(tree.max_violation, 0.0);
      tl.pass = tree.max_violation <= 1e-12;
      out.push_back(tl);

      PercExact ex = perc_exact_check(g, c, p);
      out.push_back(inequality_line("perc-moment/" + tag, "perc-second-moment", ex.theta,
                                    ex.rhs, 1e-12));
    }
  }
  return out;
}

}  // namespace onearm
