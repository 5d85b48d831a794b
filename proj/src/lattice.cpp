#include "onearm/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <set>
#include <stdexcept>

namespace onearm {

Norm norm_from_string(const std::string& s) {
  if (s == "euclidean" || s == "l2") return Norm::euclidean;
  if (s == "l1") return Norm::l1;
  if (s == "linf" || s == "max") return Norm::linf;
  throw std::invalid_argument("unknown norm: " + s);
}

std::string to_string(Norm n) {
  switch (n) {
    case Norm::euclidean: return "euclidean";
    case Norm::l1: return "l1";
    default: return "linf";
  }
}

long long norm_sq(std::span<const int> v) {
  long long s = 0;
  for (int c : v) s += (long long)c * c;
  return s;
}

double norm_value(Norm n, std::span<const int> v) {
  switch (n) {
    case Norm::euclidean: return std::sqrt(double(norm_sq(v)));
    case Norm::l1: {
      long long s = 0;
      for (int c : v) s += std::abs(c);
      return double(s);
    }
    default: {
      int m = 0;
      for (int c : v) m = std::max(m, std::abs(c));
      return double(m);
    }
  }
}

bool within_radius(Norm n, std::span<const int> v, double radius) {
  if (radius < 0) return false;
  if (n == Norm::euclidean) return double(norm_sq(v)) <= radius * radius;
  return norm_value(n, v) <= radius;
}

std::vector<int> CouplingSpec::canonical_class(std::span<const int> dx) {
  std::vector<int> c(dx.begin(), dx.end());
  for (int& v : c) v = std::abs(v);
  std::sort(c.begin(), c.end(), std::greater<int>());
  return c;
}

CouplingSpec CouplingSpec::nearest_neighbor(int dim, double j, double beta) {
  CouplingSpec s;
  s.dim = dim;
  s.range = 1;
  s.beta = beta;
  std::vector<int> cls(dim, 0);
  cls[0] = 1;
  s.table.emplace_back(cls, j);
  s.finalize();
  return s;
}

std::vector<std::vector<int>> signed_permutation_images(std::span<const int> p) {
  std::vector<int> base(p.begin(), p.end());
  std::sort(base.begin(), base.end());
  std::set<std::vector<int>> out;
  do {
    // every sign assignment of the current permutation
    int d = int(base.size());
    for (int signs = 0; signs < (1 << d); ++signs) {
      std::vector<int> img = base;
      bool ok = true;
      for (int i = 0; i < d; ++i) {
        if (signs & (1 << i)) {
          if (img[i] == 0) { ok = false; break; }
          img[i] = -img[i];
        }
      }
      if (ok) out.insert(img);
    }
  } while (std::next_permutation(base.begin(), base.end()));
  return {out.begin(), out.end()};
}

void CouplingSpec::finalize() {
  if (dim < 1) throw std::invalid_argument("coupling: dimension must be positive");
  if (range < 1) throw std::invalid_argument("coupling: range must be positive");
  // beta = 0 is admitted so enumeration checks can exercise the decoupled case
  if (!(beta >= 0)) throw std::invalid_argument("coupling: beta must be nonnegative");
  support.clear();
  support_j.clear();
  std::set<std::vector<int>> seen;
  double total = 0;
  for (auto& [cls, j] : table) {
    if (int(cls.size()) != dim)
      throw std::invalid_argument("coupling: displacement class has wrong dimension");
    if (j < 0) throw std::invalid_argument("coupling: J must be nonnegative");
    auto canon = canonical_class(cls);
    if (canon != cls)
      throw std::invalid_argument("coupling: class not in canonical form");
    bool all_zero = std::all_of(cls.begin(), cls.end(), [](int c) { return c == 0; });
    if (all_zero && j != 0)
      throw std::invalid_argument("coupling: J at the origin must be zero");
    long long n2 = norm_sq(cls);
    if (n2 > (long long)range * range)
      throw std::invalid_argument("coupling: class outside the declared range");
    if (j == 0) continue;
    total += j;
    for (auto& img : signed_permutation_images(cls)) {
      if (seen.insert(img).second) {
        support.push_back(img);
        support_j.push_back(j);
      }
    }
  }
  if (total == 0)
    throw std::invalid_argument("coupling: degenerate (all J zero)");
}

double CouplingSpec::j_of(std::span<const int> dx) const {
  auto canon = canonical_class(dx);
  if (norm_sq(canon) > (long long)range * range) return 0;
  for (auto& [cls, j] : table)
    if (cls == canon) return j;
  return 0;
}

bool CouplingSpec::is_nearest_neighbor() const {
  if (support.empty()) return false;
  for (auto& s : support)
    if (norm_sq(s) != 1) return false;
  return true;
}

namespace {

void enumerate_box(int dim, int lo, int hi, std::vector<int>& cur,
                   const std::function<void(std::span<const int>)>& fn) {
  if (int(cur.size()) == dim) {
    fn(cur);
    return;
  }
  for (int x = lo; x <= hi; ++x) {
    cur.push_back(x);
    enumerate_box(dim, lo, hi, cur, fn);
    cur.pop_back();
  }
}

}  // namespace

int BallGeometry::index_of(std::span<const int> p) const {
  // vertices are stored in lexicographic order: binary search
  int lo = 0, hi = n() - 1;
  while (lo <= hi) {
    int mid = (lo + hi) / 2;
    auto q = point(mid);
    int cmp = 0;
    for (int i = 0; i < dim; ++i) {
      if (q[i] != p[i]) { cmp = q[i] < p[i] ? -1 : 1; break; }
    }
    if (cmp == 0) return mid;
    if (cmp < 0) lo = mid + 1;
    else hi = mid - 1;
  }
  return -1;
}

double BallGeometry::dist_to_boundary_exact(std::span<const int> u) const {
  if (boundary.empty()) throw std::invalid_argument("geometry has no boundary shell");
  double best = -1;
  std::vector<int> diff(dim);
  for (int b : boundary) {
    auto x = point(b);
    for (int i = 0; i < dim; ++i) diff[i] = u[i] - x[i];
    double d = norm_value(norm, diff);
    if (best < 0 || d < best) best = d;
  }
  return best;
}

double BallGeometry::dist_to_boundary_radial(std::span<const int> u) const {
  double d = std::fabs(radius_inner - norm_value(norm, u));
  return std::max(d, 1.0);
}

void BallGeometry::dump_adjacency(std::ostream& os) const {
  os << "# ball d=" << dim << " R=" << radius_outer << " r=" << radius_inner
     << " norm=" << to_string(norm) << " vertices=" << n()
     << " bonds=" << bonds.size() << " ghost=" << ghost() << "\n";
  std::vector<std::vector<std::pair<int, double>>> adj(n());
  for (auto& b : bonds) {
    adj[b.u].emplace_back(b.v, b.j);
    adj[b.v].emplace_back(b.u, b.j);
  }
  for (int i = 0; i < n(); ++i) {
    os << "v " << i;
    auto p = point(i);
    for (int c : p) os << " " << c;
    os << " inner=" << int(inner[i]) << " boundary=" << int(on_boundary[i]);
    for (auto& [j, w] : adj[i]) os << " " << j << ":" << w;
    os << "\n";
  }
  for (int b : boundary) os << "g " << b << "\n";
}

BallGeometry build_ball(const CouplingSpec& coupling, double radius_outer,
                        double radius_inner, Norm norm) {
  if (coupling.support.empty())
    throw std::invalid_argument("build_ball: coupling not finalized or degenerate");
  if (!(radius_inner >= 0) || !(radius_inner < radius_outer))
    throw std::invalid_argument(
        "build_ball: invalid radii (need 0 <= r < R), got r=" +
        std::to_string(radius_inner) + " R=" + std::to_string(radius_outer));

  BallGeometry g;
  g.dim = coupling.dim;
  g.radius_outer = radius_outer;
  g.radius_inner = radius_inner;
  g.norm = norm;

  int box = int(std::floor(radius_outer));
  std::vector<int> cur;
  enumerate_box(g.dim, -box, box, cur, [&](std::span<const int> v) {
    if (within_radius(norm, v, radius_outer))
      g.coords.insert(g.coords.end(), v.begin(), v.end());
  });

  int n = g.n();
  g.inner.assign(n, 0);
  g.on_boundary.assign(n, 0);
  std::vector<int> nb(g.dim);
  for (int i = 0; i < n; ++i) {
    auto p = g.point(i);
    g.inner[i] = within_radius(norm, p, radius_inner) ? 1 : 0;
  }
  for (int i = 0; i < n; ++i) {
    if (g.inner[i]) continue;
    auto p = g.point(i);
    for (std::size_t s = 0; s < coupling.support.size(); ++s) {
      for (int k = 0; k < g.dim; ++k) nb[k] = p[k] + coupling.support[s][k];
      if (within_radius(norm, nb, radius_inner)) {
        g.on_boundary[i] = 1;
        g.boundary.push_back(i);
        break;
      }
    }
  }

  for (int i = 0; i < n; ++i) {
    auto p = g.point(i);
    for (std::size_t s = 0; s < coupling.support.size(); ++s) {
      for (int k = 0; k < g.dim; ++k) nb[k] = p[k] + coupling.support[s][k];
      // count each unordered pair once via lexicographic comparison
      bool greater = false;
      for (int k = 0; k < g.dim; ++k) {
        if (nb[k] != p[k]) { greater = nb[k] > p[k]; break; }
      }
      if (!greater) continue;
      int j = g.index_of(nb);
      if (j >= 0) g.bonds.push_back({i, j, coupling.support_j[s]});
    }
  }
  return g;
}

}  // namespace onearm
