// lldm command line: graph generation, dataset generation, training,
// prediction, evaluation and filter export, composed from the C API.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lldm.h"

namespace {

using nlohmann::json;

struct CliError {
  int exit_code;
  std::string message;
};

// exit codes: 0 ok, 1 usage, 2 data/validation, 3 numerical
int exit_code_for(lldm_status st) {
  switch (st) {
    case LLDM_OK: return 0;
    case LLDM_ERR_ARGUMENT:
    case LLDM_ERR_PARSE:
    case LLDM_ERR_IO:
    case LLDM_ERR_DATA: return 2;
    default: return 3;
  }
}

void check(lldm_status st, const std::string& context) {
  if (st == LLDM_OK) return;
  throw CliError{exit_code_for(st),
                 context + ": " + lldm_status_name(st) + ": " + lldm_last_error()};
}

void usage_error(const std::string& message) { throw CliError{1, message}; }

template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  explicit Handle(T* p) : ptr(p) {}
  ~Handle() { reset(); }
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  Handle(Handle&& o) noexcept : ptr(o.ptr) { o.ptr = nullptr; }
  Handle& operator=(Handle&& o) noexcept {
    if (this != &o) {
      reset();
      ptr = o.ptr;
      o.ptr = nullptr;
    }
    return *this;
  }
  void reset() {
    if (ptr) Free(ptr);
    ptr = nullptr;
  }
  T** out() { return &ptr; }
  T* get() const { return ptr; }
};

using GraphHandle = Handle<lldm_graph, lldm_graph_free>;
using DatasetHandle = Handle<lldm_dataset, lldm_dataset_free>;
using ModelHandle = Handle<lldm_model, lldm_model_free>;

void write_json(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out.good()) throw CliError{2, "cannot write " + path.string()};
  out << j.dump(2) << "\n";
  if (!out.good()) throw CliError{2, "write failed: " + path.string()};
}

// Config echo written next to every command's output; `run-config` replays
// the stored argv.
void write_config_echo(const std::vector<std::string>& argv, const json& options,
                       const std::filesystem::path& path) {
  json j;
  j["argv"] = argv;
  j["options"] = options;
  write_json(j, path);
}

lldm_dynamics_kind parse_dynamics(const std::string& name) {
  if (name == "kuramoto") return LLDM_DYN_KURAMOTO;
  if (name == "fca") return LLDM_DYN_FCA;
  if (name == "ghm") return LLDM_DYN_GHM;
  usage_error("unknown dynamics '" + name + "'");
  return LLDM_DYN_FCA;
}

json graph_stats(const lldm_graph* g) {
  double density = 0.0;
  check(lldm_graph_edge_density(g, &density), "edge density");
  json j;
  j["nodes"] = lldm_graph_node_count(g);
  j["edges"] = lldm_graph_edge_count(g);
  j["density"] = density;
  return j;
}

json metrics_json(const lldm_metrics& m, std::uint64_t seed) {
  json j;
  j["accuracy"] = m.accuracy;
  j["tp"] = m.tp;
  j["tn"] = m.tn;
  j["fp"] = m.fp;
  j["fn"] = m.fn;
  j["n"] = m.n;
  j["seed"] = seed;
  return j;
}

int run(const std::vector<std::string>& argv);

// ---- gen-graph ----

struct GenGraphOptions {
  std::string mode;  // "nws" | "from-file"
  std::uint32_t nodes = 300;
  std::uint32_t neighbors = 12;
  double shortcut_p = 0.4;
  std::uint64_t seed = 0;
  std::string input;
  std::string output;
};

void cmd_gen_graph(const GenGraphOptions& opt, const std::vector<std::string>& argv) {
  GraphHandle g;
  json options;
  options["mode"] = opt.mode;
  options["output"] = opt.output;
  if (opt.mode == "nws") {
    check(lldm_graph_generate_nws(opt.nodes, opt.neighbors, opt.shortcut_p, opt.seed, g.out()),
          "gen-graph nws");
    options["nodes"] = opt.nodes;
    options["neighbors"] = opt.neighbors;
    options["shortcut_p"] = opt.shortcut_p;
    options["seed"] = opt.seed;
  } else {
    check(lldm_graph_load_edge_list(opt.input.c_str(), g.out()), "gen-graph from-file");
    options["input"] = opt.input;
  }
  check(lldm_graph_save_edge_list(g.get(), opt.output.c_str()), "save edge list");
  const json stats = graph_stats(g.get());
  write_json(stats, opt.output + ".stats.json");
  write_config_echo(argv, options, opt.output + ".config.json");
  std::printf("wrote %s: %llu nodes, %llu edges, density %.6f\n", opt.output.c_str(),
              static_cast<unsigned long long>(stats["nodes"].get<std::uint64_t>()),
              static_cast<unsigned long long>(stats["edges"].get<std::uint64_t>()),
              stats["density"].get<double>());
}

// ---- gen-data ----

struct GenDataOptions {
  std::vector<std::string> graphs;
  int gen_parents = 0;
  std::uint32_t nodes = 300;
  std::uint32_t neighbors = 12;
  double shortcut_p = 0.4;
  std::string dynamics = "fca";
  int kappa = -1;
  double coupling = 1.0;
  double step_size = 0.05;
  double sync_eps = 1e-2;
  std::string mode = "subgraph";
  int k = 10;
  std::int64_t count = 0;
  int paths_per_graph = 50;
  int t_horizon = -1;
  int t_observed = -1;
  std::uint64_t seed = 0;
  bool balance = false;
  std::string output;
};

void cmd_gen_data(const GenDataOptions& opt, const std::vector<std::string>& argv) {
  const lldm_dynamics_kind kind = parse_dynamics(opt.dynamics);
  lldm_dynamics_params dyn;
  lldm_dynamics_params_defaults(kind, &dyn);
  if (opt.kappa > 0) dyn.kappa = opt.kappa;
  dyn.coupling = opt.coupling;
  dyn.step_size = opt.step_size;
  dyn.sync_tol = opt.sync_eps;

  int32_t t_horizon = 0, t_observed = 0;
  lldm_default_horizons(kind, &t_horizon, &t_observed);
  if (opt.t_horizon > 0) t_horizon = opt.t_horizon;
  if (opt.t_observed > 0) t_observed = opt.t_observed;

  std::vector<GraphHandle> parents;
  for (const auto& path : opt.graphs) {
    GraphHandle g;
    check(lldm_graph_load_edge_list(path.c_str(), g.out()), "load graph " + path);
    parents.push_back(std::move(g));
  }
  for (int i = 0; i < opt.gen_parents; ++i) {
    GraphHandle g;
    check(lldm_graph_generate_nws(opt.nodes, opt.neighbors, opt.shortcut_p,
                                  lldm_mix_seed(opt.seed, 7000 + static_cast<std::uint64_t>(i)),
                                  g.out()),
          "generate parent " + std::to_string(i));
    parents.push_back(std::move(g));
  }
  if (parents.empty()) usage_error("gen-data needs --graph or --gen-parents");

  DatasetHandle ds;
  json options;
  options["dynamics"] = opt.dynamics;
  options["kappa"] = dyn.kappa;
  options["mode"] = opt.mode;
  options["k"] = opt.k;
  options["t_horizon"] = t_horizon;
  options["t_observed"] = t_observed;
  options["seed"] = opt.seed;
  options["balance"] = opt.balance;
  options["output"] = opt.output;
  options["graphs"] = opt.graphs;
  options["gen_parents"] = opt.gen_parents;
  if (kind == LLDM_DYN_KURAMOTO) {
    options["coupling"] = opt.coupling;
    options["step_size"] = opt.step_size;
    options["sync_eps"] = opt.sync_eps;
  }

  std::vector<uint8_t> parent_labels;
  if (opt.mode == "subgraph") {
    if (parents.size() != 1) usage_error("subgraph mode takes exactly one parent graph");
    if (opt.count < 1) usage_error("subgraph mode needs --count >= 1");
    options["count"] = opt.count;
    check(lldm_dataset_generate_subgraph(parents[0].get(), &dyn, opt.k, opt.count, t_horizon,
                                         t_observed, opt.seed, opt.balance ? 1 : 0, ds.out()),
          "gen-data");
  } else if (opt.mode == "global") {
    options["paths_per_graph"] = opt.paths_per_graph;
    std::vector<const lldm_graph*> raw;
    raw.reserve(parents.size());
    for (const auto& g : parents) raw.push_back(g.get());
    parent_labels.resize(parents.size());
    check(lldm_dataset_generate_global(raw.data(), raw.size(), &dyn, opt.k, opt.paths_per_graph,
                                       t_horizon, t_observed, opt.seed, opt.balance ? 1 : 0,
                                       parent_labels.data(), ds.out()),
          "gen-data");
  } else {
    usage_error("--mode must be subgraph or global");
  }

  check(lldm_dataset_save(ds.get(), opt.output.c_str()), "save dataset");
  write_config_echo(argv, options, std::filesystem::path(opt.output) / "config.json");

  const std::int64_t n = lldm_dataset_count(ds.get());
  const std::int64_t pos = lldm_dataset_positives(ds.get());
  std::printf("wrote %s: %lld examples, labels: %lld positive / %lld negative\n",
              opt.output.c_str(), static_cast<long long>(n), static_cast<long long>(pos),
              static_cast<long long>(n - pos));
  if (!parent_labels.empty()) {
    std::int64_t parent_pos = 0;
    for (auto b : parent_labels) parent_pos += b;
    std::printf("parents: %lld positive / %lld negative\n",
                static_cast<long long>(parent_pos),
                static_cast<long long>(parent_labels.size() - parent_pos));
  }
}

// ---- train ----

struct TrainOptions {
  std::string data;
  std::string method = "smf";
  int rank = 8;
  double xi = 0.5;
  bool xi_grid = false;
  int iters = 250;
  int inner_iters = 20;
  double ridge = 1e-6;
  double dense_frac = 0.10;
  double sparse_frac = 0.10;
  bool intercept = false;
  std::uint64_t seed = 0;
  std::string output;
};

lldm_status train_once(const std::string& method, const lldm_dataset* ds,
                       const lldm_train_options* opts, lldm_model** out) {
  if (method == "smf") return lldm_train_smf(ds, opts, out);
  if (method == "nmf") return lldm_train_nmf(ds, opts, out);
  if (method == "nmf-distill") return lldm_train_nmf_distill(ds, opts, out);
  usage_error("--method must be smf, nmf or nmf-distill");
  return LLDM_ERR_ARGUMENT;
}

void cmd_train(const TrainOptions& opt, const std::vector<std::string>& argv) {
  if (opt.xi_grid && opt.method != "smf") usage_error("--xi-grid applies to --method smf");

  DatasetHandle ds;
  check(lldm_dataset_load(opt.data.c_str(), ds.out()), "load dataset " + opt.data);

  lldm_train_options topts;
  lldm_train_options_defaults(&topts);
  topts.rank = opt.rank;
  topts.xi = opt.xi;
  topts.iters = opt.iters;
  topts.inner_iters = opt.inner_iters;
  topts.ridge_lambda = opt.ridge;
  topts.seed = opt.seed;
  topts.intercept = opt.intercept ? 1 : 0;
  topts.dense_frac = opt.dense_frac;
  topts.sparse_frac = opt.sparse_frac;

  json options;
  options["data"] = opt.data;
  options["method"] = opt.method;
  options["rank"] = opt.rank;
  options["iters"] = opt.iters;
  options["inner_iters"] = opt.inner_iters;
  options["ridge"] = opt.ridge;
  options["intercept"] = opt.intercept;
  options["seed"] = opt.seed;
  options["output"] = opt.output;
  if (opt.method == "nmf-distill") {
    options["dense_frac"] = opt.dense_frac;
    options["sparse_frac"] = opt.sparse_frac;
  }

  ModelHandle model;
  if (opt.xi_grid) {
    // 20% of the training data held out for the grid; the best validation
    // model is kept.
    DatasetHandle subtrain, val;
    check(lldm_dataset_split(ds.get(), 0.8, lldm_mix_seed(opt.seed, 0x9A1D), subtrain.out(),
                             val.out()),
          "validation split");
    const double grid[3] = {0.1, 0.5, 1.0};
    double best_acc = -1.0;
    double best_xi = grid[0];
    for (double xi : grid) {
      lldm_train_options g = topts;
      g.xi = xi;
      ModelHandle candidate;
      check(train_once(opt.method, subtrain.get(), &g, candidate.out()),
            "train xi=" + std::to_string(xi));
      lldm_metrics m;
      check(lldm_eval_metrics(candidate.get(), val.get(), &m), "validation accuracy");
      std::printf("xi=%.1f: validation accuracy %.4f\n", xi, m.accuracy);
      if (m.accuracy > best_acc) {
        best_acc = m.accuracy;
        best_xi = xi;
        model = std::move(candidate);
      }
    }
    options["xi_grid"] = {0.1, 0.5, 1.0};
    options["xi"] = best_xi;
    std::printf("selected xi=%.1f (validation accuracy %.4f)\n", best_xi, best_acc);
  } else {
    options["xi"] = opt.xi;
    check(train_once(opt.method, ds.get(), &topts, model.out()), "train");
  }

  check(lldm_model_save(model.get(), opt.output.c_str()), "save model");
  write_config_echo(argv, options, std::filesystem::path(opt.output) / "config.json");
  std::printf("wrote %s: rank %d, k=%d, T=%d\n", opt.output.c_str(),
              lldm_model_rank(model.get()), lldm_model_k(model.get()),
              lldm_model_t_observed(model.get()));
}

// ---- predict ----

struct PredictOptions {
  std::string mode;  // "local" | "global"
  std::string model;
  std::string data;
  std::string graph;
  int samples = 50;
  int t_horizon = 0;
  std::uint64_t seed = 0;
  std::string output;
};

void cmd_predict(const PredictOptions& opt, const std::vector<std::string>& argv) {
  ModelHandle model;
  check(lldm_model_load(opt.model.c_str(), model.out()), "load model " + opt.model);

  json options;
  options["mode"] = opt.mode;
  options["model"] = opt.model;
  options["output"] = opt.output;
  json result;

  if (opt.mode == "local") {
    DatasetHandle ds;
    check(lldm_dataset_load(opt.data.c_str(), ds.out()), "load dataset " + opt.data);
    options["data"] = opt.data;
    std::vector<double> probs(static_cast<std::size_t>(lldm_dataset_count(ds.get())));
    check(lldm_model_predict_dataset(model.get(), ds.get(), probs.data()), "predict");
    result["probabilities"] = probs;
  } else {
    GraphHandle g;
    check(lldm_graph_load_edge_list(opt.graph.c_str(), g.out()), "load graph " + opt.graph);
    options["graph"] = opt.graph;
    options["samples"] = opt.samples;
    options["seed"] = opt.seed;
    options["t_horizon"] = opt.t_horizon;
    std::vector<double> trace(static_cast<std::size_t>(opt.samples));
    double final_prob = 0.0;
    int32_t label = 0;
    check(lldm_model_predict_global(model.get(), g.get(), opt.samples, opt.seed, opt.t_horizon,
                                    trace.data(), &final_prob,
                                    opt.t_horizon >= 1 ? &label : nullptr),
          "predict global");
    result["final"] = final_prob;
    result["trace"] = trace;
    result["samples_used"] = opt.samples;
    if (opt.t_horizon >= 1) result["label_at_horizon"] = label;
  }

  write_json(result, opt.output);
  write_config_echo(argv, options, opt.output + ".config.json");
  std::printf("wrote %s\n", opt.output.c_str());
}

// ---- eval ----

struct EvalOptions {
  std::string model;
  std::string data;
  std::uint64_t seed = 0;
  bool with_baseline = false;
  std::string output;
};

void cmd_eval(const EvalOptions& opt, const std::vector<std::string>& argv) {
  ModelHandle model;
  check(lldm_model_load(opt.model.c_str(), model.out()), "load model " + opt.model);
  DatasetHandle ds;
  check(lldm_dataset_load(opt.data.c_str(), ds.out()), "load dataset " + opt.data);

  std::filesystem::create_directories(opt.output);
  lldm_metrics m;
  check(lldm_eval_metrics(model.get(), ds.get(), &m), "metrics");
  write_json(metrics_json(m, opt.seed), std::filesystem::path(opt.output) / "metrics.json");

  const auto n = static_cast<std::size_t>(lldm_dataset_count(ds.get()));
  std::vector<double> fitted(n), deviance(n);
  check(lldm_eval_residuals(model.get(), ds.get(), fitted.data(), deviance.data()), "residuals");
  {
    std::ofstream csv(std::filesystem::path(opt.output) / "residuals.csv", std::ios::binary);
    if (!csv.good()) throw CliError{2, "cannot write residuals.csv"};
    csv << "index,label,fitted,deviance\n";
    char buf[128];
    for (std::size_t i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof(buf), "%zu,%d,%.12g,%.12g\n", i,
                    lldm_dataset_label(ds.get(), static_cast<int64_t>(i)), fitted[i],
                    deviance[i]);
      csv << buf;
    }
  }

  json options;
  options["model"] = opt.model;
  options["data"] = opt.data;
  options["seed"] = opt.seed;
  options["with_baseline"] = opt.with_baseline;
  options["output"] = opt.output;

  std::printf("accuracy %.4f on %lld examples\n", m.accuracy, static_cast<long long>(m.n));
  if (opt.with_baseline) {
    lldm_metrics base;
    check(lldm_eval_baseline(ds.get(), opt.seed, &base), "baseline");
    write_json(metrics_json(base, opt.seed),
               std::filesystem::path(opt.output) / "baseline_metrics.json");
    std::printf("baseline accuracy %.4f\n", base.accuracy);
  }
  write_config_echo(argv, options, std::filesystem::path(opt.output) / "config.json");
}

// ---- export-filters ----

struct ExportOptions {
  std::string model;
  std::string output;
};

void cmd_export_filters(const ExportOptions& opt, const std::vector<std::string>& argv) {
  ModelHandle model;
  check(lldm_model_load(opt.model.c_str(), model.out()), "load model " + opt.model);
  const int rank = lldm_model_rank(model.get());
  const int k = lldm_model_k(model.get());
  const int t = lldm_model_t_observed(model.get());

  std::vector<double> beta(static_cast<std::size_t>(rank));
  check(lldm_model_beta(model.get(), beta.data()), "beta");

  // filters ordered by descending regression coefficient
  std::vector<int> order(static_cast<std::size_t>(rank));
  for (int i = 0; i < rank; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return beta[static_cast<std::size_t>(a)] >
                                        beta[static_cast<std::size_t>(b)]; });

  std::filesystem::create_directories(opt.output);
  json beta_out = json::array();
  std::vector<float> filter(static_cast<std::size_t>(k) * k * t);
  char name[64];
  for (int pos = 0; pos < rank; ++pos) {
    const int idx = order[static_cast<std::size_t>(pos)];
    beta_out.push_back({{"rank", pos},
                        {"filter_index", idx},
                        {"beta", beta[static_cast<std::size_t>(idx)]}});
    check(lldm_model_filter(model.get(), idx, filter.data()), "filter");
    std::snprintf(name, sizeof(name), "filter_%02d", pos);
    const auto dir = std::filesystem::path(opt.output) / name;
    std::filesystem::create_directories(dir);
    for (int tt = 0; tt < t; ++tt) {
      std::snprintf(name, sizeof(name), "t%03d.csv", tt);
      std::ofstream csv(dir / name, std::ios::binary);
      if (!csv.good()) throw CliError{2, "cannot write filter slice"};
      char cell[32];
      for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
          const float v = filter[(static_cast<std::size_t>(i) * k + j) * t + tt];
          std::snprintf(cell, sizeof(cell), "%.9g", static_cast<double>(v));
          csv << cell << (j + 1 < k ? "," : "");
        }
        csv << "\n";
      }
    }
  }
  write_json(beta_out, std::filesystem::path(opt.output) / "beta.json");

  json options;
  options["model"] = opt.model;
  options["output"] = opt.output;
  write_config_echo(argv, options, std::filesystem::path(opt.output) / "config.json");
  std::printf("wrote %d filters to %s\n", rank, opt.output.c_str());
}

// ---- run-config ----

void cmd_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw CliError{2, "cannot open config " + path};
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw CliError{2, "bad config json: " + std::string(e.what())};
  }
  if (!j.contains("argv") || !j["argv"].is_array()) throw CliError{2, "config missing argv"};
  std::vector<std::string> argv;
  for (const auto& a : j["argv"]) argv.push_back(a.get<std::string>());
  if (argv.empty()) throw CliError{2, "config argv empty"};
  const int code = run(argv);
  if (code != 0) throw CliError{code, "re-run failed"};
}

int run(const std::vector<std::string>& argv) {
  CLI::App app{"latent linear dynamics model pipeline"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = all cores)");

  GenGraphOptions gg;
  auto* gen_graph = app.add_subcommand("gen-graph", "generate or ingest a graph");
  gen_graph->require_subcommand(1);
  auto* gg_nws = gen_graph->add_subcommand("nws", "Newman-Watts-Strogatz small world");
  gg_nws->add_option("--nodes", gg.nodes, "node count");
  gg_nws->add_option("--neighbors", gg.neighbors, "ring-lattice degree (even)");
  gg_nws->add_option("--shortcut-p", gg.shortcut_p, "shortcut probability");
  gg_nws->add_option("--seed", gg.seed, "generator seed");
  gg_nws->add_option("-o,--output", gg.output, "edge list output path")->required();
  auto* gg_file = gen_graph->add_subcommand("from-file", "load, compact and re-save");
  gg_file->add_option("--input", gg.input, "edge list input path")->required();
  gg_file->add_option("-o,--output", gg.output, "edge list output path")->required();

  GenDataOptions gd;
  auto* gen_data = app.add_subcommand("gen-data", "generate a labeled CAT dataset");
  gen_data->add_option("--graph", gd.graphs, "parent graph edge list (repeatable)");
  gen_data->add_option("--gen-parents", gd.gen_parents, "generate this many NWS parents");
  gen_data->add_option("--nodes", gd.nodes, "generated parent node count");
  gen_data->add_option("--neighbors", gd.neighbors, "generated parent ring degree");
  gen_data->add_option("--shortcut-p", gd.shortcut_p, "generated parent shortcut probability");
  gen_data->add_option("--dynamics", gd.dynamics, "kuramoto | fca | ghm")->required();
  gen_data->add_option("--kappa", gd.kappa, "discrete phase-space size");
  gen_data->add_option("--coupling", gd.coupling, "kuramoto coupling strength");
  gen_data->add_option("--step-size", gd.step_size, "kuramoto step size");
  gen_data->add_option("--sync-eps", gd.sync_eps, "kuramoto synchronization tolerance");
  gen_data->add_option("--mode", gd.mode, "subgraph | global");
  gen_data->add_option("--k", gd.k, "subgraph node count");
  gen_data->add_option("--count", gd.count, "examples (subgraph mode)");
  gen_data->add_option("--paths-per-graph", gd.paths_per_graph, "paths per parent (global mode)");
  gen_data->add_option("--t-horizon", gd.t_horizon, "label horizon T'");
  gen_data->add_option("--t-observed", gd.t_observed, "observed iterations T");
  gen_data->add_option("--seed", gd.seed, "master seed");
  gen_data->add_flag("--balance", gd.balance, "force equal class counts");
  gen_data->add_option("-o,--output", gd.output, "dataset directory")->required();

  TrainOptions tr;
  auto* train = app.add_subcommand("train", "train an LLDM");
  train->add_option("--data", tr.data, "dataset directory")->required();
  train->add_option("--method", tr.method, "smf | nmf | nmf-distill");
  train->add_option("--rank", tr.rank, "dictionary size R");
  train->add_option("--xi", tr.xi, "SMF reconstruction weight");
  train->add_flag("--xi-grid", tr.xi_grid, "sweep xi over {0.1, 0.5, 1.0}");
  train->add_option("--iters", tr.iters, "factorization iterations");
  train->add_option("--inner-iters", tr.inner_iters, "projected-gradient steps per block");
  train->add_option("--ridge", tr.ridge, "logistic ridge penalty");
  train->add_option("--dense-frac", tr.dense_frac, "distillation dense fraction");
  train->add_option("--sparse-frac", tr.sparse_frac, "distillation sparse fraction");
  train->add_flag("--intercept", tr.intercept, "fit a logistic intercept");
  train->add_option("--seed", tr.seed, "training seed");
  train->add_option("-o,--output", tr.output, "model directory")->required();

  PredictOptions pr;
  auto* predict = app.add_subcommand("predict", "predict synchronization");
  predict->require_subcommand(1);
  auto* pr_local = predict->add_subcommand("local", "per-example probabilities");
  pr_local->add_option("--model", pr.model, "model directory")->required();
  pr_local->add_option("--data", pr.data, "dataset directory")->required();
  pr_local->add_option("-o,--output", pr.output, "output json")->required();
  auto* pr_global = predict->add_subcommand("global", "whole-graph recursive averaging");
  pr_global->add_option("--model", pr.model, "model directory")->required();
  pr_global->add_option("--graph", pr.graph, "graph edge list")->required();
  pr_global->add_option("--samples", pr.samples, "MCMC subgraph samples");
  pr_global->add_option("--seed", pr.seed, "simulation/chain seed");
  pr_global->add_option("--t-horizon", pr.t_horizon,
                        "also report the simulated label at this horizon");
  pr_global->add_option("-o,--output", pr.output, "output json")->required();

  EvalOptions ev;
  auto* eval = app.add_subcommand("eval", "accuracy metrics and deviance residuals");
  eval->add_option("--model", ev.model, "model directory")->required();
  eval->add_option("--data", ev.data, "dataset directory")->required();
  eval->add_option("--seed", ev.seed, "baseline seed");
  eval->add_flag("--with-baseline", ev.with_baseline, "also evaluate the baseline predictor");
  eval->add_option("-o,--output", ev.output, "output directory")->required();

  ExportOptions ex;
  auto* export_filters = app.add_subcommand("export-filters", "CSV slices per filter");
  export_filters->add_option("--model", ex.model, "model directory")->required();
  export_filters->add_option("-o,--output", ex.output, "output directory")->required();

  std::string config_path;
  auto* run_config = app.add_subcommand("run-config", "re-run from a config echo");
  run_config->add_option("config", config_path, "config json path")->required();

  // CLI11 parses argv in reverse
  std::vector<std::string> args(argv.rbegin(), argv.rend());
  args.pop_back();  // program name
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (threads > 0) lldm_set_threads(threads);

  try {
    if (gg_nws->parsed() || gg_file->parsed()) {
      gg.mode = gg_nws->parsed() ? "nws" : "from-file";
      cmd_gen_graph(gg, argv);
    } else if (gen_data->parsed()) {
      cmd_gen_data(gd, argv);
    } else if (train->parsed()) {
      cmd_train(tr, argv);
    } else if (predict->parsed()) {
      pr.mode = pr_local->parsed() ? "local" : "global";
      cmd_predict(pr, argv);
    } else if (eval->parsed()) {
      cmd_eval(ev, argv);
    } else if (export_filters->parsed()) {
      cmd_export_filters(ex, argv);
    } else if (run_config->parsed()) {
      cmd_run_config(config_path);
    }
  } catch (const CliError& e) {
    std::fprintf(stderr, "lldm: %s\n", e.message.c_str());
    return e.exit_code;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args);
}
