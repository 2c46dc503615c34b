#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

namespace lldm {

// Undirected simple graph with contiguous 0-based node ids and sorted
// neighbor lists. Immutable after construction.
class Graph {
 public:
  Graph() = default;

  // Builds from an explicit edge set. Rejects self-loops, out-of-range ids
  // and duplicate edges.
  static Graph from_edges(std::uint32_t node_count,
                          std::span<const std::pair<std::uint32_t, std::uint32_t>> edges);

  // Builds from already-symmetric adjacency lists (generator fast path).
  // Lists are sorted here; self-loops and duplicates are rejected.
  static Graph from_adjacency(std::vector<std::vector<std::uint32_t>> adj);

  std::uint32_t node_count() const noexcept { return static_cast<std::uint32_t>(adj_.size()); }
  std::uint64_t edge_count() const noexcept { return edge_count_; }
  const std::vector<std::uint32_t>& neighbors(std::uint32_t v) const { return adj_[v]; }
  std::uint32_t degree(std::uint32_t v) const { return static_cast<std::uint32_t>(adj_[v].size()); }
  bool has_edge(std::uint32_t u, std::uint32_t v) const;

  // All edges as (u, v) with u < v, lexicographically sorted.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges() const;

 private:
  std::vector<std::vector<std::uint32_t>> adj_;
  std::uint64_t edge_count_ = 0;
};

// Newman-Watts-Strogatz small-world parameters: ring lattice on `nodes`
// vertices where every vertex joins its `neighbors` nearest ring neighbors,
// plus one random shortcut per ring edge with probability shortcut_p.
struct NwsParams {
  std::uint32_t nodes = 0;
  std::uint32_t neighbors = 0;  // even, < nodes
  double shortcut_p = 0.0;      // in [0, 1]
  std::uint64_t seed = 0;
};

Graph generate_nws(const NwsParams& params);

// Edge-list text format: one edge per line, two whitespace-separated decimal
// integers; lines starting with '#' are ignored; LF or CRLF. Node ids may be
// arbitrary and are compacted to 0..n-1 in first-seen order. Duplicate and
// reversed-duplicate lines collapse; self-loops are an error.
Graph load_edge_list(const std::filesystem::path& path);
void save_edge_list(const Graph& g, const std::filesystem::path& path);

// Subgraph induced on ordered_nodes; node i of the result corresponds to
// ordered_nodes[i], which fixes the canonical ordering of sampled motifs.
Graph induced_subgraph(const Graph& g, std::span<const std::uint32_t> ordered_nodes);

double edge_density(const Graph& g);  // |E| / (n(n-1)/2), needs n >= 2
bool is_connected(const Graph& g);

}  // namespace lldm
