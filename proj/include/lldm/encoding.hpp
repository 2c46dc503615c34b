#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lldm/dynamics.hpp"
#include "lldm/graph.hpp"
#include "lldm/linalg.hpp"

namespace lldm {

// Colored adjacency tensor: nonnegative k x k x T tensor whose slice t is the
// subgraph adjacency matrix weighted by the circular phase distance along
// each edge at time t. Stored row-major as data[(i*k + j)*t_len + t].
struct Cat {
  int k = 0;
  int t = 0;
  std::vector<float> data;

  Cat() = default;
  Cat(int k_, int t_) : k(k_), t(t_), data(static_cast<std::size_t>(k_) * k_ * t_, 0.0f) {}

  std::size_t index(int i, int j, int tt) const {
    return (static_cast<std::size_t>(i) * k + j) * t + tt;
  }
  float at(int i, int j, int tt) const { return data[index(i, j, tt)]; }
};

// Circular distance between two phases: min of the two directed mod-kappa
// (or mod-2pi) differences.
double phase_distance(double a, double b, const DynamicsSpec& spec);

// CAT of the first t_observed configurations of traj on subgraph f.
Cat build_cat(const Graph& f, const Trajectory& traj, int t_observed);

// Lexicographic (i, then j, then t) flattening and its column-stacking
// counterpart; vectorize(build) order matches the in-memory layout.
std::vector<double> vectorize(const Cat& c);
Matrix matricize(std::span<const Cat> tensors);  // k^2 T rows, one column per tensor

// Throws unless symmetry, support and range bounds hold.
void validate_cat(const Cat& c, const Graph& f, const DynamicsSpec& spec);

struct DatasetManifest {
  int format_version = 1;
  DynamicsKind dynamics = DynamicsKind::Fca;
  int kappa = 0;
  int k = 0;
  int t_observed = 0;
  int t_horizon = 0;
  std::uint64_t count = 0;
  std::uint64_t labels_positive = 0;
  std::uint64_t seed = 0;
  std::string mode;    // "run-on-subgraph" | "restrict-parent"
  std::string parent;  // free-form provenance descriptor
};

// Labeled CAT collection. The aux per-example fields (subgraph edge density
// and concentration flags over the observed window) feed distillation and
// the concentration-principle baseline.
struct Dataset {
  DatasetManifest manifest;
  std::vector<Cat> cats;
  std::vector<std::uint8_t> labels;
  std::vector<float> densities;
  std::vector<std::uint8_t> init_concentrated;
  std::vector<std::uint8_t> ever_concentrated;

  std::size_t count() const { return cats.size(); }
  bool has_aux() const { return densities.size() == cats.size(); }
};

Dataset subset(const Dataset& ds, std::span<const std::size_t> indices);

struct SubgraphGenOptions {
  int k = 10;
  std::int64_t count = 0;
  int t_horizon = 0;   // T' (label time)
  int t_observed = 0;  // T  (encoded prefix), must be < t_horizon
  std::uint64_t seed = 0;
  bool balance = false;  // optional equal-class rejection sampling
  std::string parent_desc;
};

// Per the run-on-subgraph protocol: sample `count` k-paths from one chain,
// run the dynamics on each induced subgraph from a random initial
// configuration, label by synchronization at t_horizon, and encode the first
// t_observed iterations.
Dataset gen_subgraph_dataset(const Graph& parent, const DynamicsSpec& spec,
                             const SubgraphGenOptions& opt);

struct GlobalGenOptions {
  int k = 10;
  int paths_per_graph = 50;
  int t_horizon = 0;
  int t_observed = 0;
  std::uint64_t seed = 0;
  bool balance = false;   // resample initial configs for a half/half parent split
  int retry_budget = 500; // per-parent resampling budget when balancing
};

// Per the restrict-parent protocol: one whole-graph trajectory per parent,
// paths_per_graph k-paths from one chain, each restricted trajectory encoded
// as a CAT carrying the parent's global label.
Dataset gen_global_dataset(std::span<const Graph> parents, const DynamicsSpec& spec,
                           const GlobalGenOptions& opt,
                           std::vector<std::uint8_t>* parent_labels = nullptr);

// Theory-informed distillation: keep the top dense_frac densest and the top
// sparse_frac sparsest examples plus every example whose initial
// configuration is concentrated; deduplicated, original order.
Dataset distill(const Dataset& ds, double dense_frac = 0.10, double sparse_frac = 0.10);

// Dataset directory: manifest.json, cats.f32 (little-endian float32,
// example-major then (i, j, t)), labels.u8, plus aux files density.f32 and
// flags.u8 (bit 0 init-concentrated, bit 1 ever-concentrated).
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace lldm
