#include "lldm/encoding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>

#include <json.hpp>

#include "lldm/error.hpp"
#include "lldm/parallel.hpp"
#include "lldm/sampling.hpp"

static_assert(std::endian::native == std::endian::little,
              "dataset and model files are defined little-endian");

namespace lldm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Fixed stream tags for deriving independent generators from a master seed.
constexpr std::uint64_t kChainStream = 0x10'0000'0000ull;
constexpr std::uint64_t kParentStream = 0x20'0000'0000ull;

Trajectory restrict_trajectory(const Trajectory& traj, std::span<const std::uint32_t> nodes,
                               int t_count) {
  Trajectory out;
  out.spec = traj.spec;
  out.configs.reserve(t_count);
  for (int t = 0; t < t_count; ++t) {
    PhaseConfig cfg(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) cfg[i] = traj.configs[t][nodes[i]];
    out.configs.push_back(std::move(cfg));
  }
  return out;
}

struct Example {
  Cat cat;
  std::uint8_t label = 0;
  float density = 0.0f;
  std::uint8_t init_concentrated = 0;
  std::uint8_t ever_concentrated = 0;
};

// Concentration flags over the observed window X_0 .. X_{T-1}.
void fill_concentration(Example& ex, const Trajectory& observed, const DynamicsSpec& spec) {
  ex.init_concentrated = is_concentrated(observed.configs.front(), spec) ? 1 : 0;
  ex.ever_concentrated = 0;
  for (const auto& cfg : observed.configs) {
    if (is_concentrated(cfg, spec)) {
      ex.ever_concentrated = 1;
      break;
    }
  }
}

Example make_subgraph_example(const Graph& sub, const DynamicsSpec& spec, int t_horizon,
                              int t_observed, Rng rng) {
  const PhaseConfig x0 = random_config(spec, sub.node_count(), rng);
  const Trajectory traj = simulate(sub, x0, spec, t_horizon);
  Example ex;
  ex.label = is_synchronized(traj.configs[t_horizon], spec) ? 1 : 0;
  ex.cat = build_cat(sub, traj, t_observed);
  ex.density = static_cast<float>(edge_density(sub));
  Trajectory observed;
  observed.spec = spec;
  observed.configs.assign(traj.configs.begin(), traj.configs.begin() + t_observed);
  fill_concentration(ex, observed, spec);
  return ex;
}

void push_example(Dataset& ds, Example&& ex) {
  ds.cats.push_back(std::move(ex.cat));
  ds.labels.push_back(ex.label);
  ds.densities.push_back(ex.density);
  ds.init_concentrated.push_back(ex.init_concentrated);
  ds.ever_concentrated.push_back(ex.ever_concentrated);
}

void finalize_manifest(Dataset& ds, const DynamicsSpec& spec, int k, int t_observed,
                       int t_horizon, std::uint64_t seed, const std::string& mode,
                       const std::string& parent_desc) {
  ds.manifest.dynamics = spec.kind;
  ds.manifest.kappa = spec.discrete() ? spec.kappa : 0;
  ds.manifest.k = k;
  ds.manifest.t_observed = t_observed;
  ds.manifest.t_horizon = t_horizon;
  ds.manifest.count = ds.cats.size();
  ds.manifest.labels_positive =
      static_cast<std::uint64_t>(std::count(ds.labels.begin(), ds.labels.end(), 1));
  ds.manifest.seed = seed;
  ds.manifest.mode = mode;
  ds.manifest.parent = parent_desc;
}

void write_file(const std::filesystem::path& path, const void* data, std::size_t bytes) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::Io, "cannot write " + path.string());
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
  require(out.good(), ErrorKind::Io, "write failed: " + path.string());
}

std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  require(in.good(), ErrorKind::Io, "cannot open " + path.string());
  const std::streamsize size = in.tellg();
  in.seekg(0);
  std::vector<char> buf(static_cast<std::size_t>(size));
  in.read(buf.data(), size);
  require(in.good(), ErrorKind::Io, "read failed: " + path.string());
  return buf;
}

}  // namespace

double phase_distance(double a, double b, const DynamicsSpec& spec) {
  if (spec.discrete()) {
    const int kappa = spec.kappa;
    int d = (static_cast<int>(a) - static_cast<int>(b)) % kappa;
    if (d < 0) d += kappa;
    return static_cast<double>(d == 0 ? 0 : std::min(d, kappa - d));
  }
  double d = std::fmod(std::fabs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

Cat build_cat(const Graph& f, const Trajectory& traj, int t_observed) {
  const int k = static_cast<int>(f.node_count());
  require(t_observed >= 1 && t_observed <= static_cast<int>(traj.configs.size()),
          ErrorKind::Argument, "t_observed outside trajectory length");
  for (const auto& cfg : traj.configs)
    require(cfg.size() == f.node_count(), ErrorKind::Argument,
            "trajectory does not match subgraph size");
  Cat cat(k, t_observed);
  for (const auto& [i, j] : f.edges()) {
    for (int t = 0; t < t_observed; ++t) {
      const auto d = static_cast<float>(
          phase_distance(traj.configs[t][i], traj.configs[t][j], traj.spec));
      cat.data[cat.index(static_cast<int>(i), static_cast<int>(j), t)] = d;
      cat.data[cat.index(static_cast<int>(j), static_cast<int>(i), t)] = d;
    }
  }
  return cat;
}

std::vector<double> vectorize(const Cat& c) {
  return std::vector<double>(c.data.begin(), c.data.end());
}

Matrix matricize(std::span<const Cat> tensors) {
  require(!tensors.empty(), ErrorKind::Argument, "matricize: no tensors");
  const std::size_t d = tensors.front().data.size();
  for (const Cat& c : tensors)
    require(c.k == tensors.front().k && c.t == tensors.front().t, ErrorKind::Argument,
            "matricize: mixed tensor shapes");
  Matrix m(d, tensors.size());
  for (std::size_t j = 0; j < tensors.size(); ++j)
    for (std::size_t i = 0; i < d; ++i) m(i, j) = tensors[j].data[i];
  return m;
}

void validate_cat(const Cat& c, const Graph& f, const DynamicsSpec& spec) {
  require(c.k == static_cast<int>(f.node_count()), ErrorKind::Argument, "cat/graph size mismatch");
  const double bound = spec.discrete() ? static_cast<double>(spec.kappa / 2)
                                       : std::numbers::pi;
  const double tol = 1e-6;  // float32 rounding headroom
  for (int i = 0; i < c.k; ++i) {
    for (int j = 0; j < c.k; ++j) {
      const bool edge = i != j && f.has_edge(i, j);
      for (int t = 0; t < c.t; ++t) {
        const float v = c.at(i, j, t);
        require(v == c.at(j, i, t), ErrorKind::Data, "cat not symmetric");
        require(v >= 0.0f, ErrorKind::Data, "cat entry negative");
        require(v <= bound + tol, ErrorKind::Data, "cat entry exceeds phase-distance bound");
        if (!edge) require(v == 0.0f, ErrorKind::Data, "cat entry off the edge support");
      }
    }
  }
}

Dataset subset(const Dataset& ds, std::span<const std::size_t> indices) {
  Dataset out;
  out.manifest = ds.manifest;
  out.cats.reserve(indices.size());
  for (std::size_t idx : indices) {
    require(idx < ds.count(), ErrorKind::Argument, "subset index out of range");
    out.cats.push_back(ds.cats[idx]);
    out.labels.push_back(ds.labels[idx]);
    if (ds.has_aux()) {
      out.densities.push_back(ds.densities[idx]);
      out.init_concentrated.push_back(ds.init_concentrated[idx]);
      out.ever_concentrated.push_back(ds.ever_concentrated[idx]);
    }
  }
  out.manifest.count = out.cats.size();
  out.manifest.labels_positive =
      static_cast<std::uint64_t>(std::count(out.labels.begin(), out.labels.end(), 1));
  return out;
}

Dataset gen_subgraph_dataset(const Graph& parent, const DynamicsSpec& spec,
                             const SubgraphGenOptions& opt) {
  spec.validate();
  require(opt.count >= 1, ErrorKind::Argument, "dataset count must be >= 1");
  require(opt.t_observed >= 1 && opt.t_observed < opt.t_horizon, ErrorKind::Argument,
          "need 1 <= t_observed < t_horizon");
  require(opt.k >= 2 && opt.k <= static_cast<int>(parent.node_count()), ErrorKind::Argument,
          "subgraph size out of range");

  Dataset ds;
  WalkChain chain(parent, opt.k, Rng(mix_seed(opt.seed, kChainStream)));

  if (!opt.balance) {
    // Paths come from one sequential chain; the per-example work is indexed
    // by independent derived streams.
    std::vector<std::vector<std::uint32_t>> paths;
    paths.reserve(opt.count);
    for (std::int64_t i = 0; i < opt.count; ++i) paths.push_back(chain.next_path());
    std::vector<Example> examples(opt.count);
    parallel_for(static_cast<std::size_t>(opt.count), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        const Graph sub = induced_subgraph(parent, paths[i]);
        examples[i] = make_subgraph_example(sub, spec, opt.t_horizon, opt.t_observed,
                                            Rng(mix_seed(opt.seed, i)));
      }
    });
    for (auto& ex : examples) push_example(ds, std::move(ex));
  } else {
    const std::int64_t want_pos = opt.count / 2;
    std::int64_t quota[2] = {opt.count - want_pos, want_pos};
    const std::int64_t max_attempts = std::max<std::int64_t>(100 * opt.count, 1000);
    std::int64_t attempt = 0;
    while (quota[0] + quota[1] > 0) {
      require(attempt < max_attempts, ErrorKind::Data,
              "class balance unattainable: still missing " + std::to_string(quota[1]) +
                  " positive / " + std::to_string(quota[0]) + " negative after " +
                  std::to_string(attempt) + " attempts");
      const auto path = chain.next_path();
      const Graph sub = induced_subgraph(parent, path);
      Example ex = make_subgraph_example(sub, spec, opt.t_horizon, opt.t_observed,
                                         Rng(mix_seed(opt.seed, attempt)));
      ++attempt;
      if (quota[ex.label] == 0) continue;
      --quota[ex.label];
      push_example(ds, std::move(ex));
    }
  }

  finalize_manifest(ds, spec, opt.k, opt.t_observed, opt.t_horizon, opt.seed, "run-on-subgraph",
                    opt.parent_desc);
  return ds;
}

Dataset gen_global_dataset(std::span<const Graph> parents, const DynamicsSpec& spec,
                           const GlobalGenOptions& opt,
                           std::vector<std::uint8_t>* parent_labels) {
  spec.validate();
  require(!parents.empty(), ErrorKind::Argument, "need at least one parent graph");
  require(opt.paths_per_graph >= 1, ErrorKind::Argument, "paths_per_graph must be >= 1");
  require(opt.t_observed >= 1 && opt.t_observed < opt.t_horizon, ErrorKind::Argument,
          "need 1 <= t_observed < t_horizon");

  const std::size_t n_parents = parents.size();
  std::int64_t quota[2] = {0, 0};
  if (opt.balance) {
    quota[1] = static_cast<std::int64_t>(n_parents / 2);
    quota[0] = static_cast<std::int64_t>(n_parents) - quota[1];
  }

  Dataset ds;
  std::vector<std::uint8_t> labels(n_parents, 0);
  for (std::size_t p = 0; p < n_parents; ++p) {
    const Graph& parent = parents[p];
    require(opt.k >= 2 && opt.k <= static_cast<int>(parent.node_count()), ErrorKind::Argument,
            "subgraph size out of range for parent " + std::to_string(p));
    Rng init_rng(mix_seed(opt.seed, kParentStream + p));

    Trajectory traj;
    std::uint8_t label = 0;
    int tries = 0;
    while (true) {
      ++tries;
      require(tries <= opt.retry_budget, ErrorKind::Data,
              "class balance unattainable on parent " + std::to_string(p) + " after " +
                  std::to_string(tries - 1) + " initial configurations (" +
                  std::to_string(quota[1]) + " positive / " + std::to_string(quota[0]) +
                  " negative still needed)");
      const PhaseConfig x0 = random_config(spec, parent.node_count(), init_rng);
      traj = simulate(parent, x0, spec, opt.t_horizon);
      label = is_synchronized(traj.configs[opt.t_horizon], spec) ? 1 : 0;
      if (!opt.balance || quota[label] > 0) break;
    }
    if (opt.balance) --quota[label];
    labels[p] = label;

    WalkChain chain(parent, opt.k, Rng(mix_seed(opt.seed, kChainStream + p)));
    for (int s = 0; s < opt.paths_per_graph; ++s) {
      const auto path = chain.next_path();
      const Graph sub = induced_subgraph(parent, path);
      const Trajectory observed = restrict_trajectory(traj, path, opt.t_observed);
      Example ex;
      ex.label = label;
      ex.cat = build_cat(sub, observed, opt.t_observed);
      ex.density = static_cast<float>(edge_density(sub));
      fill_concentration(ex, observed, spec);
      push_example(ds, std::move(ex));
    }
  }

  if (parent_labels) *parent_labels = labels;
  const std::string desc = "parents:" + std::to_string(n_parents);
  finalize_manifest(ds, spec, opt.k, opt.t_observed, opt.t_horizon, opt.seed, "restrict-parent",
                    desc);
  return ds;
}

Dataset distill(const Dataset& ds, double dense_frac, double sparse_frac) {
  require(ds.count() > 0, ErrorKind::Argument, "distill: empty dataset");
  require(ds.has_aux(), ErrorKind::Data, "distill: dataset lacks density/concentration metadata");
  require(dense_frac > 0.0 && dense_frac <= 0.5, ErrorKind::Argument,
          "dense_frac must lie in (0, 0.5]");
  require(sparse_frac > 0.0 && sparse_frac <= 0.5, ErrorKind::Argument,
          "sparse_frac must lie in (0, 0.5]");

  const std::size_t n = ds.count();
  const auto n_dense = static_cast<std::size_t>(std::ceil(dense_frac * static_cast<double>(n)));
  const auto n_sparse = static_cast<std::size_t>(std::ceil(sparse_frac * static_cast<double>(n)));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Density quantile ties resolve toward opposite ends so the dense and
  // sparse picks stay disjoint on degenerate (all-equal) datasets.
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (ds.densities[a] != ds.densities[b]) return ds.densities[a] > ds.densities[b];
    return a < b;
  });
  std::vector<char> keep(n, 0);
  for (std::size_t i = 0; i < n_dense; ++i) keep[order[i]] = 1;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (ds.densities[a] != ds.densities[b]) return ds.densities[a] < ds.densities[b];
    return a > b;
  });
  for (std::size_t i = 0; i < n_sparse; ++i) keep[order[i]] = 1;
  for (std::size_t i = 0; i < n; ++i)
    if (ds.init_concentrated[i]) keep[i] = 1;

  std::vector<std::size_t> selected;
  for (std::size_t i = 0; i < n; ++i)
    if (keep[i]) selected.push_back(i);
  require(!selected.empty(), ErrorKind::Data, "distill produced an empty dataset");
  return subset(ds, selected);
}

void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  require(ds.count() > 0, ErrorKind::Argument, "refusing to save an empty dataset");
  require(ds.labels.size() == ds.count(), ErrorKind::Argument, "label count mismatch");
  std::filesystem::create_directories(dir);

  nlohmann::json j;
  j["format_version"] = ds.manifest.format_version;
  j["dynamics"] = dynamics_name(ds.manifest.dynamics);
  j["kappa"] = ds.manifest.kappa;
  j["k"] = ds.manifest.k;
  j["t_observed"] = ds.manifest.t_observed;
  j["t_horizon"] = ds.manifest.t_horizon;
  j["count"] = ds.manifest.count;
  j["labels_positive"] = ds.manifest.labels_positive;
  j["seed"] = ds.manifest.seed;
  j["mode"] = ds.manifest.mode;
  j["parent"] = ds.manifest.parent;
  const std::string text = j.dump(2) + "\n";
  write_file(dir / "manifest.json", text.data(), text.size());

  const std::size_t d = ds.cats.front().data.size();
  std::vector<float> flat;
  flat.reserve(d * ds.count());
  for (const Cat& c : ds.cats) {
    require(c.data.size() == d, ErrorKind::Argument, "mixed cat shapes in dataset");
    flat.insert(flat.end(), c.data.begin(), c.data.end());
  }
  write_file(dir / "cats.f32", flat.data(), flat.size() * sizeof(float));
  write_file(dir / "labels.u8", ds.labels.data(), ds.labels.size());

  if (ds.has_aux()) {
    write_file(dir / "density.f32", ds.densities.data(), ds.densities.size() * sizeof(float));
    std::vector<std::uint8_t> flags(ds.count());
    for (std::size_t i = 0; i < ds.count(); ++i)
      flags[i] = static_cast<std::uint8_t>((ds.init_concentrated[i] ? 1 : 0) |
                                           (ds.ever_concentrated[i] ? 2 : 0));
    write_file(dir / "flags.u8", flags.data(), flags.size());
  }
}

Dataset load_dataset(const std::filesystem::path& dir) {
  const auto manifest_bytes = read_file(dir / "manifest.json");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(manifest_bytes.begin(), manifest_bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, "bad dataset manifest: " + std::string(e.what()));
  }

  Dataset ds;
  try {
    ds.manifest.format_version = j.at("format_version").get<int>();
    ds.manifest.dynamics = dynamics_from_name(j.at("dynamics").get<std::string>());
    ds.manifest.kappa = j.at("kappa").get<int>();
    ds.manifest.k = j.at("k").get<int>();
    ds.manifest.t_observed = j.at("t_observed").get<int>();
    ds.manifest.t_horizon = j.at("t_horizon").get<int>();
    ds.manifest.count = j.at("count").get<std::uint64_t>();
    ds.manifest.labels_positive = j.at("labels_positive").get<std::uint64_t>();
    ds.manifest.seed = j.at("seed").get<std::uint64_t>();
    ds.manifest.mode = j.at("mode").get<std::string>();
    ds.manifest.parent = j.at("parent").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, "dataset manifest missing key: " + std::string(e.what()));
  }
  require(ds.manifest.format_version == 1, ErrorKind::Data, "unsupported dataset format version");

  const std::size_t count = ds.manifest.count;
  const std::size_t d = static_cast<std::size_t>(ds.manifest.k) * ds.manifest.k *
                        ds.manifest.t_observed;
  const auto cat_bytes = read_file(dir / "cats.f32");
  require(cat_bytes.size() == count * d * sizeof(float), ErrorKind::Data,
          "cats.f32 size does not match manifest");
  ds.cats.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Cat c(ds.manifest.k, ds.manifest.t_observed);
    std::memcpy(c.data.data(), cat_bytes.data() + i * d * sizeof(float), d * sizeof(float));
    ds.cats.push_back(std::move(c));
  }

  const auto label_bytes = read_file(dir / "labels.u8");
  require(label_bytes.size() == count, ErrorKind::Data, "labels.u8 size does not match manifest");
  ds.labels.assign(label_bytes.begin(), label_bytes.end());
  for (auto b : ds.labels)
    require(b == 0 || b == 1, ErrorKind::Data, "labels.u8 holds a value other than 0/1");

  if (std::filesystem::exists(dir / "density.f32") && std::filesystem::exists(dir / "flags.u8")) {
    const auto density_bytes = read_file(dir / "density.f32");
    const auto flag_bytes = read_file(dir / "flags.u8");
    require(density_bytes.size() == count * sizeof(float) && flag_bytes.size() == count,
            ErrorKind::Data, "aux file sizes do not match manifest");
    ds.densities.resize(count);
    std::memcpy(ds.densities.data(), density_bytes.data(), density_bytes.size());
    ds.init_concentrated.resize(count);
    ds.ever_concentrated.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      ds.init_concentrated[i] = static_cast<std::uint8_t>(flag_bytes[i]) & 1 ? 1 : 0;
      ds.ever_concentrated[i] = static_cast<std::uint8_t>(flag_bytes[i]) & 2 ? 1 : 0;
    }
  }
  return ds;
}

}  // namespace lldm
