#include "lldm/graph.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "lldm/error.hpp"
#include "lldm/rng.hpp"

namespace lldm {

Graph Graph::from_edges(std::uint32_t node_count,
                        std::span<const std::pair<std::uint32_t, std::uint32_t>> edges) {
  std::vector<std::vector<std::uint32_t>> adj(node_count);
  for (const auto& [u, v] : edges) {
    require(u != v, ErrorKind::Data, "self-loop at node " + std::to_string(u));
    require(u < node_count && v < node_count, ErrorKind::Argument,
            "edge endpoint out of range: (" + std::to_string(u) + ", " + std::to_string(v) + ")");
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  return from_adjacency(std::move(adj));
}

Graph Graph::from_adjacency(std::vector<std::vector<std::uint32_t>> adj) {
  Graph g;
  std::uint64_t total = 0;
  const std::uint32_t n = static_cast<std::uint32_t>(adj.size());
  for (std::uint32_t v = 0; v < n; ++v) {
    auto& nbrs = adj[v];
    std::sort(nbrs.begin(), nbrs.end());
    require(std::adjacent_find(nbrs.begin(), nbrs.end()) == nbrs.end(), ErrorKind::Data,
            "duplicate edge at node " + std::to_string(v));
    require(!std::binary_search(nbrs.begin(), nbrs.end(), v), ErrorKind::Data,
            "self-loop at node " + std::to_string(v));
    require(nbrs.empty() || nbrs.back() < n, ErrorKind::Argument, "neighbor id out of range");
    total += nbrs.size();
  }
  g.adj_ = std::move(adj);
  g.edge_count_ = total / 2;
  return g;
}

bool Graph::has_edge(std::uint32_t u, std::uint32_t v) const {
  const auto& a = adj_[u].size() <= adj_[v].size() ? adj_[u] : adj_[v];
  const std::uint32_t target = adj_[u].size() <= adj_[v].size() ? v : u;
  return std::binary_search(a.begin(), a.end(), target);
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> Graph::edges() const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  out.reserve(edge_count_);
  for (std::uint32_t u = 0; u < node_count(); ++u)
    for (std::uint32_t v : adj_[u])
      if (u < v) out.emplace_back(u, v);
  return out;
}

Graph generate_nws(const NwsParams& p) {
  require(p.nodes >= 3, ErrorKind::Argument, "nws: need at least 3 nodes");
  require(p.neighbors >= 2 && p.neighbors % 2 == 0, ErrorKind::Argument,
          "nws: neighbors must be even and >= 2");
  require(p.neighbors < p.nodes, ErrorKind::Argument, "nws: neighbors must be < nodes");
  require(p.shortcut_p >= 0.0 && p.shortcut_p <= 1.0, ErrorKind::Argument,
          "nws: shortcut_p must lie in [0, 1]");

  const std::uint32_t n = p.nodes;
  const std::uint32_t half = p.neighbors / 2;
  Rng rng(p.seed);

  // Ring edges are implicit (circular distance <= half); only shortcuts are
  // tracked in a hash set while the graph grows.
  auto ring_adjacent = [&](std::uint32_t u, std::uint32_t v) {
    std::uint32_t d = u > v ? u - v : v - u;
    d = std::min(d, n - d);
    return d >= 1 && d <= half;
  };
  auto key = [n](std::uint32_t u, std::uint32_t v) {
    if (u > v) std::swap(u, v);
    return static_cast<std::uint64_t>(u) * n + v;
  };
  std::unordered_set<std::uint64_t> shortcuts;
  std::vector<std::uint32_t> extra_degree(n, 0);
  auto connected = [&](std::uint32_t u, std::uint32_t v) {
    return ring_adjacent(u, v) || shortcuts.count(key(u, v)) != 0;
  };

  // One shortcut attempt per ring edge; the endpoint is redrawn until it is
  // neither u itself nor an existing neighbor, matching the convention behind
  // the expected edge count nk/2 * (1 + p).
  for (std::uint32_t u = 0; u < n; ++u) {
    for (std::uint32_t d = 1; d <= half; ++d) {
      if (!rng.bernoulli(p.shortcut_p)) continue;
      if (extra_degree[u] + p.neighbors >= n - 1) continue;  // saturated
      std::uint32_t w;
      do {
        w = static_cast<std::uint32_t>(rng.below(n));
      } while (w == u || connected(u, w));
      shortcuts.insert(key(u, w));
      ++extra_degree[u];
      ++extra_degree[w];
    }
  }

  std::vector<std::vector<std::uint32_t>> adj(n);
  for (std::uint32_t u = 0; u < n; ++u) adj[u].reserve(p.neighbors + extra_degree[u]);
  for (std::uint32_t u = 0; u < n; ++u)
    for (std::uint32_t d = 1; d <= half; ++d) {
      const std::uint32_t v = (u + d) % n;
      adj[u].push_back(v);
      adj[v].push_back(u);
    }
  for (std::uint64_t k : shortcuts) {
    const auto u = static_cast<std::uint32_t>(k / n);
    const auto v = static_cast<std::uint32_t>(k % n);
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  return Graph::from_adjacency(std::move(adj));
}

Graph load_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Io, "cannot open edge list: " + path.string());

  std::unordered_map<std::uint64_t, std::uint32_t> compact;  // raw id -> 0..n-1, first-seen
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::unordered_set<std::uint64_t> seen;
  auto intern = [&compact](std::uint64_t raw) {
    auto [it, inserted] = compact.emplace(raw, static_cast<std::uint32_t>(compact.size()));
    return it->second;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;

    std::istringstream tokens(line);
    std::uint64_t a = 0, b = 0;
    std::string trailing;
    if (!(tokens >> a >> b) || (tokens >> trailing)) {
      throw Error(ErrorKind::Parse,
                  "malformed edge line " + std::to_string(line_no) + ": '" + line + "'");
    }
    if (a == b) {
      throw Error(ErrorKind::Data, "self-loop on line " + std::to_string(line_no));
    }
    std::uint32_t u = intern(a);
    std::uint32_t v = intern(b);
    if (u > v) std::swap(u, v);
    const std::uint64_t k = (static_cast<std::uint64_t>(u) << 32) | v;
    if (seen.insert(k).second) edges.emplace_back(u, v);
  }
  return Graph::from_edges(static_cast<std::uint32_t>(compact.size()), edges);
}

void save_edge_list(const Graph& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::Io, "cannot write edge list: " + path.string());
  for (const auto& [u, v] : g.edges()) out << u << ' ' << v << '\n';
  require(out.good(), ErrorKind::Io, "write failed: " + path.string());
}

Graph induced_subgraph(const Graph& g, std::span<const std::uint32_t> ordered_nodes) {
  const auto k = static_cast<std::uint32_t>(ordered_nodes.size());
  std::unordered_set<std::uint32_t> distinct;
  for (std::uint32_t v : ordered_nodes) {
    require(v < g.node_count(), ErrorKind::Argument,
            "subgraph node " + std::to_string(v) + " out of range");
    require(distinct.insert(v).second, ErrorKind::Argument,
            "duplicate node " + std::to_string(v) + " in subgraph order");
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (std::uint32_t i = 0; i < k; ++i)
    for (std::uint32_t j = i + 1; j < k; ++j)
      if (g.has_edge(ordered_nodes[i], ordered_nodes[j])) edges.emplace_back(i, j);
  return Graph::from_edges(k, edges);
}

double edge_density(const Graph& g) {
  require(g.node_count() >= 2, ErrorKind::Argument, "edge density needs at least 2 nodes");
  const double n = g.node_count();
  return static_cast<double>(g.edge_count()) / (n * (n - 1.0) / 2.0);
}

bool is_connected(const Graph& g) {
  const std::uint32_t n = g.node_count();
  if (n <= 1) return true;
  std::vector<char> visited(n, 0);
  std::vector<std::uint32_t> stack{0};
  visited[0] = 1;
  std::uint32_t reached = 1;
  while (!stack.empty()) {
    const std::uint32_t u = stack.back();
    stack.pop_back();
    for (std::uint32_t v : g.neighbors(u)) {
      if (!visited[v]) {
        visited[v] = 1;
        ++reached;
        stack.push_back(v);
      }
    }
  }
  return reached == n;
}

}  // namespace lldm
