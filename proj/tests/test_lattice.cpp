#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "onearm/fit.hpp"
#include "onearm/lattice.hpp"

using namespace onearm;

namespace {

std::set<std::vector<int>> point_set(const BallGeometry& g) {
  std::set<std::vector<int>> out;
  for (int i = 0; i < g.n(); ++i) {
    auto p = g.point(i);
    out.insert({p.begin(), p.end()});
  }
  return out;
}

std::set<std::vector<int>> boundary_set(const BallGeometry& g) {
  std::set<std::vector<int>> out;
  for (int b : g.boundary) {
    auto p = g.point(b);
    out.insert({p.begin(), p.end()});
  }
  return out;
}

}  // namespace

TEST_CASE("d=1 nearest neighbor ball and shell") {
  CouplingSpec c = CouplingSpec::nearest_neighbor(1, 1.0, 1.0);
  BallGeometry g = build_ball(c, 2.0, 1.0);
  CHECK(point_set(g) == std::set<std::vector<int>>{{-2}, {-1}, {0}, {1}, {2}});
  CHECK(boundary_set(g) == std::set<std::vector<int>>{{-2}, {2}});
  CHECK(g.bonds.size() == 4);
}

TEST_CASE("d=2 shell of the unit ball matches the brute-force scan") {
  CouplingSpec c = CouplingSpec::nearest_neighbor(2, 1.0, 1.0);
  BallGeometry g = build_ball(c, 2.5, 1.0);
  std::set<std::vector<int>> expected = {{-2, 0}, {2, 0}, {0, -2}, {0, 2},
                                         {-1, -1}, {-1, 1}, {1, -1}, {1, 1}};
  // independent scan over all |v| <= 2.5
  std::set<std::vector<int>> scanned;
  for (int x = -2; x <= 2; ++x)
    for (int y = -2; y <= 2; ++y) {
      if (x * x + y * y > 6.25) continue;
      if (x * x + y * y <= 1) continue;
      for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        int ux = x + dx, uy = y + dy;
        if (ux * ux + uy * uy <= 1) scanned.insert({x, y});
      }
    }
  CHECK(scanned == expected);
  CHECK(boundary_set(g) == expected);
  CHECK(g.boundary.size() == 8);
}

TEST_CASE("range-2 coupling shell equals exhaustive adjacency scan") {
  CouplingSpec c;
  c.dim = 2;
  c.range = 2;
  c.beta = 1.0;
  c.table.emplace_back(std::vector<int>{1, 0}, 1.0);
  c.table.emplace_back(std::vector<int>{1, 1}, 0.5);
  c.table.emplace_back(std::vector<int>{2, 0}, 0.25);
  c.finalize();
  BallGeometry g = build_ball(c, 4.0, 1.0);

  std::set<std::vector<int>> scanned;
  for (int i = 0; i < g.n(); ++i) {
    auto v = g.point(i);
    if (within_radius(Norm::euclidean, v, 1.0)) continue;
    for (int j = 0; j < g.n(); ++j) {
      auto u = g.point(j);
      if (!within_radius(Norm::euclidean, u, 1.0)) continue;
      std::vector<int> d{v[0] - u[0], v[1] - u[1]};
      if (c.j_of(d) > 0) {
        scanned.insert({v[0], v[1]});
        break;
      }
    }
  }
  CHECK(boundary_set(g) == scanned);
  std::vector<int> probe{2, 1};
  CHECK(scanned.count(probe) == 1);
}

TEST_CASE("distance to the shell: exact and radial modes") {
  CouplingSpec c1 = CouplingSpec::nearest_neighbor(1, 1.0, 1.0);
  BallGeometry g1 = build_ball(c1, 5.0, 3.0);
  std::vector<int> origin{0};
  CHECK(g1.dist_to_boundary_exact(origin) == doctest::Approx(4.0));
  std::vector<int> on_shell{4};
  CHECK(g1.dist_to_boundary_exact(on_shell) == doctest::Approx(0.0));

  CouplingSpec c2 = CouplingSpec::nearest_neighbor(2, 1.0, 1.0);
  BallGeometry g2 = build_ball(c2, 4.0, 1.0);
  std::vector<int> probe{3, 0};
  CHECK(g2.dist_to_boundary_exact(probe) == doctest::Approx(1.0));
  CHECK(g2.dist_to_boundary_radial(probe) == doctest::Approx(2.0));
}

TEST_CASE("monotonicity of balls and bonds in the radius") {
  CouplingSpec c = CouplingSpec::nearest_neighbor(2, 1.0, 1.0);
  BallGeometry small = build_ball(c, 3.0, 1.0);
  BallGeometry large = build_ball(c, 4.5, 1.0);
  auto ps = point_set(small), pl = point_set(large);
  CHECK(std::includes(pl.begin(), pl.end(), ps.begin(), ps.end()));

  std::set<std::pair<std::vector<int>, std::vector<int>>> bonds_small, bonds_large;
  auto bond_set = [](const BallGeometry& g) {
    std::set<std::pair<std::vector<int>, std::vector<int>>> out;
    for (auto& b : g.bonds) {
      auto u = g.point(b.u);
      auto v = g.point(b.v);
      out.insert({{u.begin(), u.end()}, {v.begin(), v.end()}});
    }
    return out;
  };
  bonds_small = bond_set(small);
  bonds_large = bond_set(large);
  CHECK(std::includes(bonds_large.begin(), bonds_large.end(), bonds_small.begin(),
                      bonds_small.end()));
}

TEST_CASE("vertex and shell sets are invariant under signed permutations") {
  CouplingSpec c = CouplingSpec::nearest_neighbor(2, 1.0, 1.0);
  BallGeometry g = build_ball(c, 3.5, 2.0);
  auto points = point_set(g);
  auto shell = boundary_set(g);
  for (auto& p : points)
    for (auto& img : signed_permutation_images(p)) CHECK(points.count(img) == 1);
  for (auto& p : shell)
    for (auto& img : signed_permutation_images(p)) CHECK(shell.count(img) == 1);
}

TEST_CASE("shell size grows like r^(d-1)") {
  CouplingSpec c = CouplingSpec::nearest_neighbor(2, 1.0, 1.0);
  std::vector<FitPoint> pts;
  for (double r : {8.0, 16.0, 32.0, 64.0}) {
    BallGeometry g = build_ball(c, r + 1.5, r);
    pts.push_back({r, double(g.boundary.size()), 0.0});
  }
  FitResult f = fit_loglog(pts);
  CHECK(std::fabs(f.slope - 1.0) < 0.15);
}

TEST_CASE("invalid inputs are rejected with informative messages") {
  CouplingSpec c = CouplingSpec::nearest_neighbor(2, 1.0, 1.0);
  CHECK_THROWS_WITH_AS(build_ball(c, 2.0, 2.0), doctest::Contains("invalid radii"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(build_ball(c, 2.0, 3.0), doctest::Contains("invalid radii"),
                       std::invalid_argument);

  CouplingSpec zero;
  zero.dim = 2;
  zero.range = 1;
  zero.beta = 1.0;
  zero.table.emplace_back(std::vector<int>{1, 0}, 0.0);
  CHECK_THROWS_WITH_AS(zero.finalize(), doctest::Contains("degenerate"),
                       std::invalid_argument);
}

TEST_CASE("norm selectors") {
  std::vector<int> v{2, -1};
  CHECK(norm_value(Norm::l1, v) == doctest::Approx(3.0));
  CHECK(norm_value(Norm::linf, v) == doctest::Approx(2.0));
  CHECK(norm_value(Norm::euclidean, v) == doctest::Approx(std::sqrt(5.0)));
  CouplingSpec c = CouplingSpec::nearest_neighbor(2, 1.0, 1.0);
  BallGeometry g = build_ball(c, 2.0, 1.0, Norm::l1);
  std::vector<int> corner{1, 1};
  CHECK(g.index_of(corner) >= 0);  // |corner|_1 = 2 <= R
}

TEST_CASE("adjacency dump is line oriented and complete") {
  CouplingSpec c = CouplingSpec::nearest_neighbor(1, 1.0, 1.0);
  BallGeometry g = build_ball(c, 2.0, 1.0);
  std::ostringstream os;
  g.dump_adjacency(os);
  std::string text = os.str();
  CHECK(text.find("# ball d=1") != std::string::npos);
  CHECK(text.find("v 0") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') >= g.n() + 1);
}
