#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace onearm {

enum class Norm { euclidean, l1, linf };

Norm norm_from_string(const std::string& s);
std::string to_string(Norm n);

long long norm_sq(std::span<const int> v);
double norm_value(Norm n, std::span<const int> v);
// Membership |v| <= radius, exact on the integer data (euclidean compares
// |v|^2 against radius^2 so lattice points never sit on a rounding edge).
bool within_radius(Norm n, std::span<const int> v, double radius);

// Translation-invariant, coordinate-symmetric, finite-range coupling.
// `table` maps a canonical displacement class (absolute coordinates sorted
// descending) to a J value; the full signed-permutation support is expanded
// on finalize().
struct CouplingSpec {
  int dim = 1;
  int range = 1;
  double beta = 1.0;
  std::vector<std::pair<std::vector<int>, double>> table;

  // expanded support, deterministic order
  std::vector<std::vector<int>> support;
  std::vector<double> support_j;

  static CouplingSpec nearest_neighbor(int dim, double j, double beta);
  static std::vector<int> canonical_class(std::span<const int> dx);

  double j_of(std::span<const int> dx) const;
  bool is_nearest_neighbor() const;
  void finalize();  // validates and expands support; throws std::invalid_argument
};

// Ball V_R around the origin with its inner-radius boundary shell, bulk
// bonds, and one ghost bond per boundary vertex.  Immutable once built.
struct BallGeometry {
  int dim = 1;
  double radius_outer = 0, radius_inner = 0;
  Norm norm = Norm::euclidean;

  std::vector<int> coords;       // n*dim, vertices in lexicographic order
  std::vector<char> inner;       // |v| <= r
  std::vector<char> on_boundary; // member of the shell
  std::vector<int> boundary;     // shell vertex indices, ascending

  struct Bond {
    int u, v;   // vertex indices, u < v in canonical order
    double j;
  };
  std::vector<Bond> bonds;

  int n() const { return int(coords.size()) / dim; }
  int ghost() const { return n(); }  // reserved index for the ghost site
  std::span<const int> point(int i) const {
    return {coords.data() + std::size_t(i) * dim, std::size_t(dim)};
  }
  int index_of(std::span<const int> p) const;  // -1 when absent

  double dist_to_boundary_exact(std::span<const int> u) const;
  double dist_to_boundary_radial(std::span<const int> u) const;

  void dump_adjacency(std::ostream& os) const;
};

BallGeometry build_ball(const CouplingSpec& coupling, double radius_outer,
                        double radius_inner, Norm norm = Norm::euclidean);

// All images of a point under signed coordinate permutations (deduplicated,
// deterministic order).  Used by symmetry tests and observable grouping.
std::vector<std::vector<int>> signed_permutation_images(std::span<const int> p);

}  // namespace onearm
