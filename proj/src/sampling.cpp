#include "lldm/sampling.hpp"

#include <algorithm>
#include <string>

#include "lldm/error.hpp"

namespace lldm {

WalkChain::WalkChain(const Graph& g, int k, Rng rng) : g_(&g), k_(k), rng_(rng) {
  require(k >= 2, ErrorKind::Argument, "walk length must be >= 2");
  require(g.node_count() >= 2 && g.edge_count() >= 1, ErrorKind::Data,
          "walk sampling needs a graph with at least one edge");
  require(is_connected(g), ErrorKind::Data, "walk sampling needs a connected graph");
  walk_.reserve(k);
  std::uint32_t v = static_cast<std::uint32_t>(rng_.below(g.node_count()));
  walk_.push_back(v);
  for (int i = 1; i < k; ++i) {
    const auto& nbrs = g.neighbors(walk_.back());
    walk_.push_back(nbrs[rng_.below(nbrs.size())]);
  }
}

void WalkChain::step() {
  ++steps_;
  if (rng_.bernoulli(0.5)) return;  // lazy half
  if (rng_.bernoulli(0.5)) {
    glauber_update();
  } else {
    shift_update();
  }
}

void WalkChain::glauber_update() {
  const int j = static_cast<int>(rng_.below(static_cast<std::uint64_t>(k_)));
  const Graph& g = *g_;
  if (j == 0) {
    const auto& nbrs = g.neighbors(walk_[1]);
    walk_[0] = nbrs[rng_.below(nbrs.size())];
  } else if (j == k_ - 1) {
    const auto& nbrs = g.neighbors(walk_[k_ - 2]);
    walk_[k_ - 1] = nbrs[rng_.below(nbrs.size())];
  } else {
    // Intersection of the flanking neighborhoods; always contains the
    // current node, hence nonempty.
    const auto& a = g.neighbors(walk_[j - 1]);
    const auto& b = g.neighbors(walk_[j + 1]);
    scratch_.clear();
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(scratch_));
    walk_[j] = scratch_[rng_.below(scratch_.size())];
  }
}

void WalkChain::shift_update() {
  // Metropolis-corrected head/tail shift. Single-site updates preserve each
  // position's bipartition side, so on bipartite graphs they alone cannot
  // reach every walk; the shift restores irreducibility while keeping the
  // uniform stationary law (acceptance ratio = forward/backward proposal
  // density ratio).
  const Graph& g = *g_;
  if (rng_.bernoulli(0.5)) {
    const auto& nbrs = g.neighbors(walk_[k_ - 1]);
    const std::uint32_t u = nbrs[rng_.below(nbrs.size())];
    const double ratio =
        static_cast<double>(g.degree(walk_[k_ - 1])) / static_cast<double>(g.degree(walk_[1]));
    if (ratio >= 1.0 || rng_.uniform() < ratio) {
      walk_.erase(walk_.begin());
      walk_.push_back(u);
    }
  } else {
    const auto& nbrs = g.neighbors(walk_[0]);
    const std::uint32_t u = nbrs[rng_.below(nbrs.size())];
    const double ratio =
        static_cast<double>(g.degree(walk_[0])) / static_cast<double>(g.degree(walk_[k_ - 2]));
    if (ratio >= 1.0 || rng_.uniform() < ratio) {
      walk_.pop_back();
      walk_.insert(walk_.begin(), u);
    }
  }
}

bool WalkChain::all_distinct() const {
  scratch_.assign(walk_.begin(), walk_.end());
  std::sort(scratch_.begin(), scratch_.end());
  return std::adjacent_find(scratch_.begin(), scratch_.end()) == scratch_.end();
}

std::vector<std::uint32_t> WalkChain::next_path(std::uint64_t max_steps) {
  if (max_steps == 0) max_steps = 10'000ull * static_cast<std::uint64_t>(k_);
  for (std::uint64_t s = 0; s < max_steps; ++s) {
    step();
    if (all_distinct()) return walk_;
  }
  throw Error(ErrorKind::Numeric,
              "no " + std::to_string(k_) + "-path found within " + std::to_string(max_steps) +
                  " chain steps (k too large for this graph?)");
}

namespace {

void extend_paths(const Graph& g, int k, std::vector<std::uint32_t>& path, std::uint32_t& visited,
                  std::vector<std::vector<std::uint32_t>>& out) {
  if (static_cast<int>(path.size()) == k) {
    out.push_back(path);
    return;
  }
  for (std::uint32_t v : g.neighbors(path.back())) {
    if (visited & (1u << v)) continue;
    visited |= 1u << v;
    path.push_back(v);
    extend_paths(g, k, path, visited, out);
    path.pop_back();
    visited &= ~(1u << v);
  }
}

}  // namespace

std::vector<std::vector<std::uint32_t>> brute_force_kpaths(const Graph& g, int k) {
  require(g.node_count() <= 12, ErrorKind::Argument, "brute-force path enumeration is guarded to <= 12 nodes");
  require(k >= 1, ErrorKind::Argument, "path length must be >= 1");
  std::vector<std::vector<std::uint32_t>> out;
  std::vector<std::uint32_t> path;
  for (std::uint32_t start = 0; start < g.node_count(); ++start) {
    path.assign(1, start);
    std::uint32_t visited = 1u << start;
    extend_paths(g, k, path, visited, out);
  }
  return out;
}

}  // namespace lldm
