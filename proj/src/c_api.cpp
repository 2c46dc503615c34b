#include "lldm.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <string>
#include <vector>

#include "lldm/error.hpp"
#include "lldm/eval.hpp"
#include "lldm/model.hpp"
#include "lldm/parallel.hpp"

struct lldm_graph {
  lldm::Graph g;
};

struct lldm_dataset {
  lldm::Dataset ds;
};

struct lldm_model {
  lldm::LldmModel m;
};

namespace {

thread_local std::string t_last_error;

lldm_status map_kind(lldm::ErrorKind kind) {
  switch (kind) {
    case lldm::ErrorKind::Argument: return LLDM_ERR_ARGUMENT;
    case lldm::ErrorKind::Parse: return LLDM_ERR_PARSE;
    case lldm::ErrorKind::Io: return LLDM_ERR_IO;
    case lldm::ErrorKind::Data: return LLDM_ERR_DATA;
    case lldm::ErrorKind::Numeric: return LLDM_ERR_NUMERIC;
  }
  return LLDM_ERR_INTERNAL;
}

template <typename Fn>
lldm_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    t_last_error.clear();
    return LLDM_OK;
  } catch (const lldm::Error& e) {
    t_last_error = e.what();
    return map_kind(e.kind());
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return LLDM_ERR_INTERNAL;
  } catch (...) {
    t_last_error = "unknown failure";
    return LLDM_ERR_INTERNAL;
  }
}

void need(bool cond, const char* msg) {
  lldm::require(cond, lldm::ErrorKind::Argument, msg);
}

lldm::DynamicsSpec to_spec(const lldm_dynamics_params* dyn) {
  need(dyn != nullptr, "dynamics parameters are NULL");
  lldm::DynamicsSpec spec;
  switch (dyn->kind) {
    case LLDM_DYN_KURAMOTO: spec.kind = lldm::DynamicsKind::Kuramoto; break;
    case LLDM_DYN_FCA: spec.kind = lldm::DynamicsKind::Fca; break;
    case LLDM_DYN_GHM: spec.kind = lldm::DynamicsKind::Ghm; break;
    default: need(false, "unknown dynamics kind");
  }
  spec.kappa = dyn->kappa;
  spec.coupling = dyn->coupling;
  spec.step_size = dyn->step_size;
  spec.sync_tol = dyn->sync_tol;
  spec.validate();
  return spec;
}

lldm::TrainConfig to_train_config(const lldm_train_options* opt) {
  need(opt != nullptr, "train options are NULL");
  lldm::TrainConfig cfg;
  cfg.rank = opt->rank;
  cfg.xi = opt->xi;
  cfg.iters = opt->iters;
  cfg.inner_iters = opt->inner_iters;
  cfg.ridge_lambda = opt->ridge_lambda;
  cfg.seed = opt->seed;
  cfg.intercept = opt->intercept != 0;
  cfg.dense_frac = opt->dense_frac;
  cfg.sparse_frac = opt->sparse_frac;
  return cfg;
}

lldm_metrics to_c_metrics(const lldm::Metrics& m) {
  return {m.accuracy, m.tp, m.tn, m.fp, m.fn, m.n};
}

}  // namespace

extern "C" {

const char* lldm_status_name(lldm_status status) {
  switch (status) {
    case LLDM_OK: return "ok";
    case LLDM_ERR_ARGUMENT: return "argument";
    case LLDM_ERR_PARSE: return "parse";
    case LLDM_ERR_IO: return "io";
    case LLDM_ERR_DATA: return "data";
    case LLDM_ERR_NUMERIC: return "numeric";
    case LLDM_ERR_INTERNAL: return "internal";
  }
  return "?";
}

const char* lldm_last_error(void) { return t_last_error.c_str(); }

const char* lldm_version(void) { return "0.1.0"; }

void lldm_set_threads(int n) { lldm::set_thread_count(n); }

uint64_t lldm_mix_seed(uint64_t master, uint64_t stream) { return lldm::mix_seed(master, stream); }

lldm_status lldm_graph_generate_nws(uint32_t nodes, uint32_t neighbors, double shortcut_p,
                                    uint64_t seed, lldm_graph** out) {
  return guarded([&] {
    need(out != nullptr, "output pointer is NULL");
    lldm::NwsParams params{nodes, neighbors, shortcut_p, seed};
    *out = new lldm_graph{lldm::generate_nws(params)};
  });
}

lldm_status lldm_graph_load_edge_list(const char* path, lldm_graph** out) {
  return guarded([&] {
    need(path != nullptr && out != nullptr, "NULL argument");
    *out = new lldm_graph{lldm::load_edge_list(path)};
  });
}

lldm_status lldm_graph_save_edge_list(const lldm_graph* g, const char* path) {
  return guarded([&] {
    need(g != nullptr && path != nullptr, "NULL argument");
    lldm::save_edge_list(g->g, path);
  });
}

uint32_t lldm_graph_node_count(const lldm_graph* g) { return g ? g->g.node_count() : 0; }

uint64_t lldm_graph_edge_count(const lldm_graph* g) { return g ? g->g.edge_count() : 0; }

lldm_status lldm_graph_edge_density(const lldm_graph* g, double* out) {
  return guarded([&] {
    need(g != nullptr && out != nullptr, "NULL argument");
    *out = lldm::edge_density(g->g);
  });
}

int lldm_graph_is_connected(const lldm_graph* g) {
  return g != nullptr && lldm::is_connected(g->g) ? 1 : 0;
}

void lldm_graph_free(lldm_graph* g) { delete g; }

void lldm_dynamics_params_defaults(lldm_dynamics_kind kind, lldm_dynamics_params* out) {
  if (!out) return;
  out->kind = kind;
  out->kappa = kind == LLDM_DYN_FCA ? 5 : (kind == LLDM_DYN_GHM ? 6 : 0);
  out->coupling = 1.0;
  out->step_size = 0.05;
  out->sync_tol = 1e-2;
}

void lldm_default_horizons(lldm_dynamics_kind kind, int32_t* t_horizon, int32_t* t_observed) {
  int32_t horizon = 100;
  int32_t observed = 50;
  if (kind == LLDM_DYN_KURAMOTO) {
    horizon = 200;
    observed = 100;
  } else if (kind == LLDM_DYN_GHM) {
    horizon = 100;
    observed = 8;
  }
  if (t_horizon) *t_horizon = horizon;
  if (t_observed) *t_observed = observed;
}

lldm_status lldm_dataset_generate_subgraph(const lldm_graph* parent,
                                           const lldm_dynamics_params* dyn, int32_t k,
                                           int64_t count, int32_t t_horizon, int32_t t_observed,
                                           uint64_t seed, int balance, lldm_dataset** out) {
  return guarded([&] {
    need(parent != nullptr && out != nullptr, "NULL argument");
    lldm::SubgraphGenOptions opt;
    opt.k = k;
    opt.count = count;
    opt.t_horizon = t_horizon;
    opt.t_observed = t_observed;
    opt.seed = seed;
    opt.balance = balance != 0;
    opt.parent_desc = "nodes:" + std::to_string(parent->g.node_count()) +
                      ",edges:" + std::to_string(parent->g.edge_count());
    *out = new lldm_dataset{lldm::gen_subgraph_dataset(parent->g, to_spec(dyn), opt)};
  });
}

lldm_status lldm_dataset_generate_global(const lldm_graph* const* parents, size_t n_parents,
                                         const lldm_dynamics_params* dyn, int32_t k,
                                         int32_t paths_per_graph, int32_t t_horizon,
                                         int32_t t_observed, uint64_t seed, int balance,
                                         uint8_t* parent_labels, lldm_dataset** out) {
  return guarded([&] {
    need(parents != nullptr && out != nullptr && n_parents > 0, "NULL or empty parent list");
    std::vector<lldm::Graph> graphs;
    graphs.reserve(n_parents);
    for (size_t i = 0; i < n_parents; ++i) {
      need(parents[i] != nullptr, "NULL parent graph");
      graphs.push_back(parents[i]->g);
    }
    lldm::GlobalGenOptions opt;
    opt.k = k;
    opt.paths_per_graph = paths_per_graph;
    opt.t_horizon = t_horizon;
    opt.t_observed = t_observed;
    opt.seed = seed;
    opt.balance = balance != 0;
    std::vector<std::uint8_t> labels;
    *out = new lldm_dataset{lldm::gen_global_dataset(graphs, to_spec(dyn), opt, &labels)};
    if (parent_labels) std::copy(labels.begin(), labels.end(), parent_labels);
  });
}

lldm_status lldm_dataset_save(const lldm_dataset* ds, const char* dir) {
  return guarded([&] {
    need(ds != nullptr && dir != nullptr, "NULL argument");
    lldm::save_dataset(ds->ds, dir);
  });
}

lldm_status lldm_dataset_load(const char* dir, lldm_dataset** out) {
  return guarded([&] {
    need(dir != nullptr && out != nullptr, "NULL argument");
    *out = new lldm_dataset{lldm::load_dataset(dir)};
  });
}

lldm_status lldm_dataset_split(const lldm_dataset* ds, double train_frac, uint64_t seed,
                               lldm_dataset** train, lldm_dataset** test) {
  return guarded([&] {
    need(ds != nullptr && train != nullptr && test != nullptr, "NULL argument");
    auto [tr, te] = lldm::split(ds->ds, train_frac, seed);
    *train = new lldm_dataset{std::move(tr)};
    *test = new lldm_dataset{std::move(te)};
  });
}

int64_t lldm_dataset_count(const lldm_dataset* ds) {
  return ds ? static_cast<int64_t>(ds->ds.count()) : 0;
}

int64_t lldm_dataset_positives(const lldm_dataset* ds) {
  return ds ? static_cast<int64_t>(ds->ds.manifest.labels_positive) : 0;
}

int32_t lldm_dataset_k(const lldm_dataset* ds) { return ds ? ds->ds.manifest.k : 0; }

int32_t lldm_dataset_t_observed(const lldm_dataset* ds) {
  return ds ? ds->ds.manifest.t_observed : 0;
}

int lldm_dataset_label(const lldm_dataset* ds, int64_t index) {
  if (!ds || index < 0 || static_cast<std::size_t>(index) >= ds->ds.count()) return -1;
  return ds->ds.labels[static_cast<std::size_t>(index)];
}

void lldm_dataset_free(lldm_dataset* ds) { delete ds; }

void lldm_train_options_defaults(lldm_train_options* out) {
  if (!out) return;
  out->rank = 8;
  out->xi = 0.5;
  out->iters = 250;
  out->inner_iters = 20;
  out->ridge_lambda = 1e-6;
  out->seed = 0;
  out->intercept = 0;
  out->dense_frac = 0.10;
  out->sparse_frac = 0.10;
}

lldm_status lldm_train_smf(const lldm_dataset* ds, const lldm_train_options* opt,
                           lldm_model** out) {
  return guarded([&] {
    need(ds != nullptr && out != nullptr, "NULL argument");
    *out = new lldm_model{lldm::train_lldm_smf(ds->ds, to_train_config(opt))};
  });
}

lldm_status lldm_train_nmf(const lldm_dataset* ds, const lldm_train_options* opt,
                           lldm_model** out) {
  return guarded([&] {
    need(ds != nullptr && out != nullptr, "NULL argument");
    *out = new lldm_model{lldm::train_lldm_nmf(ds->ds, to_train_config(opt))};
  });
}

lldm_status lldm_train_nmf_distill(const lldm_dataset* ds, const lldm_train_options* opt,
                                   lldm_model** out) {
  return guarded([&] {
    need(ds != nullptr && out != nullptr, "NULL argument");
    *out = new lldm_model{lldm::train_lldm_t(ds->ds, to_train_config(opt))};
  });
}

lldm_status lldm_model_save(const lldm_model* m, const char* dir) {
  return guarded([&] {
    need(m != nullptr && dir != nullptr, "NULL argument");
    lldm::save_model(m->m, dir);
  });
}

lldm_status lldm_model_load(const char* dir, lldm_model** out) {
  return guarded([&] {
    need(dir != nullptr && out != nullptr, "NULL argument");
    *out = new lldm_model{lldm::load_model(dir)};
  });
}

int32_t lldm_model_rank(const lldm_model* m) {
  return m ? static_cast<int32_t>(m->m.rank()) : 0;
}

int32_t lldm_model_k(const lldm_model* m) { return m ? m->m.k : 0; }

int32_t lldm_model_t_observed(const lldm_model* m) { return m ? m->m.t : 0; }

lldm_dynamics_kind lldm_model_dynamics(const lldm_model* m) {
  if (!m) return LLDM_DYN_FCA;
  switch (m->m.dynamics) {
    case lldm::DynamicsKind::Kuramoto: return LLDM_DYN_KURAMOTO;
    case lldm::DynamicsKind::Fca: return LLDM_DYN_FCA;
    case lldm::DynamicsKind::Ghm: return LLDM_DYN_GHM;
  }
  return LLDM_DYN_FCA;
}

int32_t lldm_model_kappa(const lldm_model* m) { return m ? m->m.kappa : 0; }

int lldm_model_intercept(const lldm_model* m, double* out) {
  if (!m || !m->m.intercept) return 0;
  if (out) *out = *m->m.intercept;
  return 1;
}

lldm_status lldm_model_beta(const lldm_model* m, double* out) {
  return guarded([&] {
    need(m != nullptr && out != nullptr, "NULL argument");
    std::copy(m->m.beta.begin(), m->m.beta.end(), out);
  });
}

lldm_status lldm_model_filter(const lldm_model* m, int32_t index, float* out) {
  return guarded([&] {
    need(m != nullptr && out != nullptr, "NULL argument");
    need(index >= 0 && static_cast<std::size_t>(index) < m->m.rank(), "filter index out of range");
    const auto& f = m->m.filters[static_cast<std::size_t>(index)];
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = static_cast<float>(f[i]);
  });
}

lldm_status lldm_model_predict_dataset(const lldm_model* m, const lldm_dataset* ds, double* out) {
  return guarded([&] {
    need(m != nullptr && ds != nullptr && out != nullptr, "NULL argument");
    for (std::size_t i = 0; i < ds->ds.count(); ++i)
      out[i] = lldm::predict_prob(m->m, ds->ds.cats[i]);
  });
}

lldm_status lldm_model_predict_global(const lldm_model* m, const lldm_graph* g,
                                      int32_t n_samples, uint64_t seed, int32_t t_horizon,
                                      double* trace, double* final_out, int32_t* label_out) {
  return guarded([&] {
    need(m != nullptr && g != nullptr, "NULL argument");
    lldm::DynamicsSpec spec;
    spec.kind = m->m.dynamics;
    spec.kappa = m->m.kappa;
    spec.validate();
    lldm::Rng init_rng(lldm::mix_seed(seed, 0x1717));
    const lldm::PhaseConfig x0 = lldm::random_config(spec, g->g.node_count(), init_rng);
    const int steps = std::max(m->m.t - 1, t_horizon);
    const lldm::Trajectory traj = lldm::simulate(g->g, x0, spec, steps);
    lldm::Rng chain_rng(lldm::mix_seed(seed, 0x2323));
    const lldm::GlobalPrediction pred =
        lldm::predict_global(m->m, g->g, traj, n_samples, chain_rng);
    if (trace) std::copy(pred.trace.begin(), pred.trace.end(), trace);
    if (final_out) *final_out = pred.final_prob;
    if (label_out) {
      *label_out = t_horizon >= 1 && lldm::is_synchronized(traj.configs[t_horizon], spec) ? 1 : 0;
    }
  });
}

void lldm_model_free(lldm_model* m) { delete m; }

lldm_status lldm_eval_metrics(const lldm_model* m, const lldm_dataset* ds, lldm_metrics* out) {
  return guarded([&] {
    need(m != nullptr && ds != nullptr && out != nullptr, "NULL argument");
    *out = to_c_metrics(lldm::accuracy(m->m, ds->ds));
  });
}

lldm_status lldm_eval_baseline(const lldm_dataset* ds, uint64_t seed, lldm_metrics* out) {
  return guarded([&] {
    need(ds != nullptr && out != nullptr, "NULL argument");
    lldm::Rng rng(lldm::mix_seed(seed, 0xBA5E));
    *out = to_c_metrics(lldm::baseline_accuracy(ds->ds, rng));
  });
}

lldm_status lldm_eval_residuals(const lldm_model* m, const lldm_dataset* ds, double* fitted,
                                double* deviance) {
  return guarded([&] {
    need(m != nullptr && ds != nullptr && fitted != nullptr && deviance != nullptr,
         "NULL argument");
    const auto rows = lldm::deviance_residuals(m->m, ds->ds);
    for (const auto& r : rows) {
      fitted[r.index] = r.fitted;
      deviance[r.index] = r.deviance;
    }
  });
}

}  // extern "C"
