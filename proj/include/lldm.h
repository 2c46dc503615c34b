/*
 * C interface to the lldm shared library.
 *
 * Objects are opaque handles created and destroyed through this API; every
 * fallible call returns an lldm_status and leaves a thread-local message
 * readable via lldm_last_error(). All functions taking a seed are
 * deterministic for a fixed seed.
 */
#ifndef LLDM_H
#define LLDM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lldm_status {
  LLDM_OK = 0,
  LLDM_ERR_ARGUMENT = 1, /* invalid parameter or shape mismatch */
  LLDM_ERR_PARSE = 2,    /* malformed input text */
  LLDM_ERR_IO = 3,       /* file system failure */
  LLDM_ERR_DATA = 4,     /* data violates a contract */
  LLDM_ERR_NUMERIC = 5,  /* numerical failure */
  LLDM_ERR_INTERNAL = 6
} lldm_status;

typedef enum lldm_dynamics_kind {
  LLDM_DYN_KURAMOTO = 0,
  LLDM_DYN_FCA = 1,
  LLDM_DYN_GHM = 2
} lldm_dynamics_kind;

typedef struct lldm_graph lldm_graph;
typedef struct lldm_dataset lldm_dataset;
typedef struct lldm_model lldm_model;

const char* lldm_status_name(lldm_status status);

/* Message from the most recent failing call on this thread ("" if none). */
const char* lldm_last_error(void);

const char* lldm_version(void);

/* Worker threads used by parallel sections (0 = hardware default). */
void lldm_set_threads(int n);

/* Derived seed stream for (master, stream) pairs; matches the library's
 * internal convention so callers can fan out reproducible sub-seeds. */
uint64_t lldm_mix_seed(uint64_t master, uint64_t stream);

/* ---- graphs ---- */

lldm_status lldm_graph_generate_nws(uint32_t nodes, uint32_t neighbors, double shortcut_p,
                                    uint64_t seed, lldm_graph** out);
lldm_status lldm_graph_load_edge_list(const char* path, lldm_graph** out);
lldm_status lldm_graph_save_edge_list(const lldm_graph* g, const char* path);
uint32_t lldm_graph_node_count(const lldm_graph* g);
uint64_t lldm_graph_edge_count(const lldm_graph* g);
lldm_status lldm_graph_edge_density(const lldm_graph* g, double* out);
int lldm_graph_is_connected(const lldm_graph* g);
void lldm_graph_free(lldm_graph* g);

/* ---- dynamics parameters ---- */

typedef struct lldm_dynamics_params {
  lldm_dynamics_kind kind;
  int32_t kappa;    /* FCA/GHM phase-space size */
  double coupling;  /* Kuramoto K */
  double step_size; /* Kuramoto h */
  double sync_tol;  /* Kuramoto synchronization tolerance */
} lldm_dynamics_params;

/* Defaults: K=1, h=0.05, eps=1e-2; kappa=5 (FCA), kappa=6 (GHM). */
void lldm_dynamics_params_defaults(lldm_dynamics_kind kind, lldm_dynamics_params* out);

/* Default horizons per dynamics: (T', T) = (200, 100) for Kuramoto,
 * (100, 50) for FCA, (100, 8) for GHM. */
void lldm_default_horizons(lldm_dynamics_kind kind, int32_t* t_horizon, int32_t* t_observed);

/* ---- datasets ---- */

lldm_status lldm_dataset_generate_subgraph(const lldm_graph* parent,
                                           const lldm_dynamics_params* dyn, int32_t k,
                                           int64_t count, int32_t t_horizon, int32_t t_observed,
                                           uint64_t seed, int balance, lldm_dataset** out);

/* parent_labels, when non-NULL, receives n_parents bytes (the global label
 * of each parent). */
lldm_status lldm_dataset_generate_global(const lldm_graph* const* parents, size_t n_parents,
                                         const lldm_dynamics_params* dyn, int32_t k,
                                         int32_t paths_per_graph, int32_t t_horizon,
                                         int32_t t_observed, uint64_t seed, int balance,
                                         uint8_t* parent_labels, lldm_dataset** out);

lldm_status lldm_dataset_save(const lldm_dataset* ds, const char* dir);
lldm_status lldm_dataset_load(const char* dir, lldm_dataset** out);
lldm_status lldm_dataset_split(const lldm_dataset* ds, double train_frac, uint64_t seed,
                               lldm_dataset** train, lldm_dataset** test);

int64_t lldm_dataset_count(const lldm_dataset* ds);
int64_t lldm_dataset_positives(const lldm_dataset* ds);
int32_t lldm_dataset_k(const lldm_dataset* ds);
int32_t lldm_dataset_t_observed(const lldm_dataset* ds);
int lldm_dataset_label(const lldm_dataset* ds, int64_t index);
void lldm_dataset_free(lldm_dataset* ds);

/* ---- training ---- */

typedef struct lldm_train_options {
  int32_t rank;
  double xi;           /* SMF reconstruction weight */
  int32_t iters;       /* factorization iterations */
  int32_t inner_iters; /* projected-gradient steps per SMF block */
  double ridge_lambda;
  uint64_t seed;
  int intercept;      /* fit a logistic intercept (default off) */
  double dense_frac;  /* distillation fractions (nmf-distill) */
  double sparse_frac;
} lldm_train_options;

void lldm_train_options_defaults(lldm_train_options* out);

lldm_status lldm_train_smf(const lldm_dataset* ds, const lldm_train_options* opt,
                           lldm_model** out);
lldm_status lldm_train_nmf(const lldm_dataset* ds, const lldm_train_options* opt,
                           lldm_model** out);
lldm_status lldm_train_nmf_distill(const lldm_dataset* ds, const lldm_train_options* opt,
                                   lldm_model** out);

/* ---- models ---- */

lldm_status lldm_model_save(const lldm_model* m, const char* dir);
lldm_status lldm_model_load(const char* dir, lldm_model** out);
int32_t lldm_model_rank(const lldm_model* m);
int32_t lldm_model_k(const lldm_model* m);
int32_t lldm_model_t_observed(const lldm_model* m);
lldm_dynamics_kind lldm_model_dynamics(const lldm_model* m);
int32_t lldm_model_kappa(const lldm_model* m);
/* Returns 1 and writes the intercept if the model has one, else 0. */
int lldm_model_intercept(const lldm_model* m, double* out);
lldm_status lldm_model_beta(const lldm_model* m, double* out /* rank doubles */);
lldm_status lldm_model_filter(const lldm_model* m, int32_t index,
                              float* out /* k*k*t floats */);

/* Per-example predicted probabilities on a dataset (count doubles). */
lldm_status lldm_model_predict_dataset(const lldm_model* m, const lldm_dataset* ds, double* out);

/* Global prediction: simulates the dynamics on g from a random initial
 * configuration for max(t_observed, t_horizon) iterations, then averages
 * subgraph predictions over n_samples MCMC k-paths. trace receives the
 * n_samples running averages. If label_out is non-NULL and t_horizon >= 1 it
 * receives the synchronization indicator of the simulated run at t_horizon. */
lldm_status lldm_model_predict_global(const lldm_model* m, const lldm_graph* g,
                                      int32_t n_samples, uint64_t seed, int32_t t_horizon,
                                      double* trace, double* final_out, int32_t* label_out);

void lldm_model_free(lldm_model* m);

/* ---- evaluation ---- */

typedef struct lldm_metrics {
  double accuracy;
  int64_t tp, tn, fp, fn, n;
} lldm_metrics;

lldm_status lldm_eval_metrics(const lldm_model* m, const lldm_dataset* ds, lldm_metrics* out);

/* Concentration-principle baseline from the dataset's stored flags. */
lldm_status lldm_eval_baseline(const lldm_dataset* ds, uint64_t seed, lldm_metrics* out);

/* fitted and deviance each receive count doubles. */
lldm_status lldm_eval_residuals(const lldm_model* m, const lldm_dataset* ds, double* fitted,
                                double* deviance);

#ifdef __cplusplus
}
#endif

#endif /* LLDM_H */
