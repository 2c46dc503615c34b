#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "lldm/encoding.hpp"
#include "lldm/factorization.hpp"

namespace lldm {

// Latent linear dynamics model: a dictionary of R unit-Frobenius-norm
// nonnegative filters (CAT-shaped, kept in double precision) and logistic
// regression coefficients over the filters' proximity scores.
struct LldmModel {
  DynamicsKind dynamics = DynamicsKind::Fca;
  int kappa = 0;
  int k = 0;
  int t = 0;
  std::vector<std::vector<double>> filters;  // each k*k*t, layout as Cat
  std::vector<double> beta;
  std::optional<double> intercept;

  std::size_t rank() const { return filters.size(); }
  void validate() const;
};

// h_j = <F_j, X>, the entrywise tensor inner product per filter.
std::vector<double> proximity_scores(const LldmModel& model, const Cat& x);

// sigma(betaT h [+ intercept]).
double predict_prob(const LldmModel& model, const Cat& x);

struct FitBetaOptions {
  double ridge_lambda = 1e-6;
  bool intercept = false;
  int max_iters = 500;
  double grad_tol = 1e-8;
};

struct FitBetaResult {
  std::vector<double> beta;
  double intercept = 0.0;
  bool converged = false;
  int iters = 0;
};

// Ridge-penalized logistic MLE on an N x R feature matrix, Newton-Raphson
// with step halving and a gradient-descent fallback on non-PD Hessians.
FitBetaResult fit_beta(const Matrix& features, std::span<const std::uint8_t> y,
                       const FitBetaOptions& opt);

struct TrainConfig {
  int rank = 8;
  double xi = 0.5;
  int iters = 250;
  int inner_iters = 20;
  double ridge_lambda = 1e-6;
  std::uint64_t seed = 0;
  bool intercept = false;
  double dense_frac = 0.10;   // nmf-distill only
  double sparse_frac = 0.10;  // nmf-distill only
};

// Joint recipe: SMF, dictionary normalization, then a beta refit on the
// normalized filters' proximity features.
LldmModel train_lldm_smf(const Dataset& ds, const TrainConfig& cfg);

// Two-stage recipe: label-free NMF, normalization, beta fit.
LldmModel train_lldm_nmf(const Dataset& ds, const TrainConfig& cfg);

// Theory-informed recipe: NMF on the distilled subset, beta fit on the full
// training set's proximity features.
LldmModel train_lldm_t(const Dataset& ds, const TrainConfig& cfg);

// Concentration-principle baseline: 1 if any observed configuration is
// concentrated, otherwise a fair coin.
int baseline_predict(const Trajectory& observed, const DynamicsSpec& spec, Rng& rng);

struct GlobalPrediction {
  double final_prob = 0.0;
  std::vector<double> trace;       // running averages p_{T;s}
  std::vector<double> per_sample;  // p^(s) for each accepted path
  std::size_t samples_used = 0;
};

// Recursive MCMC averaging of subgraph-level predictions along one k-path
// chain over the observed trajectory on g.
GlobalPrediction predict_global(const LldmModel& model, const Graph& g, const Trajectory& traj,
                                int n_samples, Rng& rng);

// Model directory: manifest.json {format_version, rank, k, t_observed,
// dynamics, kappa, beta, intercept} + filters.f32 (filter-major float32).
void save_model(const LldmModel& model, const std::filesystem::path& dir);
LldmModel load_model(const std::filesystem::path& dir);

}  // namespace lldm
