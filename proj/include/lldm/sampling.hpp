#pragma once

#include <cstdint>
#include <vector>

#include "lldm/graph.hpp"
#include "lldm/rng.hpp"

namespace lldm {

// Lazy Glauber chain over k-walks (adjacency-respecting node sequences) whose
// stationary distribution is uniform; rejection to all-distinct walks yields
// approximately uniform k-paths.
class WalkChain {
 public:
  // Initializes from a simple random walk started at a uniform node. The
  // graph must be connected with at least one edge, k >= 2.
  WalkChain(const Graph& g, int k, Rng rng);

  // One lazy chain update: with probability 1/2 do nothing, otherwise apply
  // either a single-site Glauber resampling (a uniform position redrawn from
  // the neighbors of its flanking positions) or a Metropolis-corrected
  // head/tail shift. Both moves leave the uniform law on k-walks invariant;
  // the shift makes the chain irreducible on bipartite graphs, where
  // single-site moves cannot change any position's bipartition side.
  void step();

  // Advances the chain until the walk has all-distinct nodes and returns it;
  // the chain keeps its state for the next call. max_steps == 0 uses the
  // default budget of 10^4 * k.
  std::vector<std::uint32_t> next_path(std::uint64_t max_steps = 0);

  const std::vector<std::uint32_t>& walk() const { return walk_; }
  std::uint64_t steps_taken() const { return steps_; }
  int k() const { return k_; }

 private:
  void glauber_update();
  void shift_update();
  bool all_distinct() const;

  const Graph* g_;
  int k_;
  std::vector<std::uint32_t> walk_;
  Rng rng_;
  std::uint64_t steps_ = 0;
  mutable std::vector<std::uint32_t> scratch_;
};

// Exhaustive enumeration of all ordered k-node paths; test oracle, guarded to
// graphs with at most 12 nodes.
std::vector<std::vector<std::uint32_t>> brute_force_kpaths(const Graph& g, int k);

}  // namespace lldm
