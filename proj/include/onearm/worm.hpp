#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "onearm/exact.hpp"
#include "onearm/rng.hpp"
#include "onearm/stats.hpp"

namespace onearm {

struct WormConfig {
  double p_bond = 0.9;        // remaining probability: defect relocation
  std::uint64_t steps = 200000;  // post-burn-in elementary moves
  std::uint64_t burnin = 0;      // 0 -> max(1e4, 50 * bonds)
  int stride = 4;                // diagonal visits between emitted samples
  int replicas = 4;
  std::uint64_t seed = 1;
  void validate() const;
};

// Metropolis worm on integer bond labels.  The state carries a defect pair
// (head, tail); bond moves increment or decrement a label adjacent to the
// head with the exact factorial weight ratio, relocation moves teleport a
// coincident defect pair.  Samples are emitted only at diagonal states
// (head == tail), where the sources equal the requested set exactly.
class WormChain {
 public:
  WormChain(const WeightedGraph& g, SourceMask sources, std::uint64_t seed,
            std::uint64_t stream);

  void step();
  bool diagonal() const { return head_ == tail_; }
  int head() const { return head_; }
  int tail() const { return tail_; }
  const std::vector<std::uint32_t>& labels() const { return labels_; }
  const WeightedGraph& graph() const { return g_; }

  SupportMask support_mask() const;  // graphs with <= 32 bonds only
  std::uint64_t accepted() const { return accepted_; }

 private:
  const WeightedGraph& g_;
  std::vector<std::uint32_t> labels_;
  std::vector<std::vector<std::pair<int, int>>> adj_;  // vertex -> (bond, other)
  int n_sites_ = 0;  // vertices incl ghost when present
  int head_ = 0, tail_ = 0;
  double p_bond_ = 0.9;
  Rng rng_;
  std::uint64_t accepted_ = 0;

  friend struct WormDriver;
  void set_p_bond(double p) { p_bond_ = p; }
};

// Runs the chain and hands every emitted diagonal state to `fn`; returns the
// number of emitted samples.
std::uint64_t worm_sample(const WeightedGraph& g, SourceMask sources, const WormConfig& cfg,
                          int replica,
                          const std::function<void(const WormChain&)>& fn);

// First/second moments of X = #{shell vertices connected to the origin
// through positive bulk bonds} in the product of a sourced field chain and a
// free chain, plus the defensible lower-bound ratio m1^2/m2.
struct SecondMomentStats {
  Estimate m1, m2, ratio;
};
SecondMomentStats second_moment_stats(const BallGeometry& g, const CouplingSpec& c,
                                      double h, const WormConfig& cfg);

}  // namespace onearm
